//! Pauli strings and weighted Pauli sums.
//!
//! A string is stored symplectically: bit `q` of `x` / `z` marks an X / Z
//! factor on qubit `q`, with both bits set meaning Y. Multiplication phases
//! follow from the per-qubit convention `letter(x,z) = i^{x·z} X^x Z^z`,
//! i.e. `Y = iXZ`.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Coefficients with modulus below this are dropped when sums are merged.
pub const MERGE_THRESHOLD: f64 = 1e-12;

/// Widths are limited by the u64 mask representation and, more practically,
/// by the dense simulator cap.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum PauliError {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("mismatched widths: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },
    #[error("invalid pauli letter '{0}'")]
    InvalidLetter(char),
    #[error("width {0} exceeds the {MAX_QUBITS}-qubit representation limit")]
    TooWide(usize),
}

/// Single Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A weighted Pauli string over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coeff: Complex64,
    pub n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize, coeff: Complex64) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliString { coeff, n, x: 0, z: 0 }
    }

    /// Build from per-qubit letters at the given positions; unlisted qubits
    /// are identity.
    pub fn from_ops(
        n: usize,
        coeff: Complex64,
        ops: &[(usize, Pauli)],
    ) -> Result<Self, PauliError> {
        if n > MAX_QUBITS {
            return Err(PauliError::TooWide(n));
        }
        let mut s = PauliString::identity(n, coeff);
        for &(q, p) in ops {
            if q >= n {
                return Err(PauliError::QubitOutOfRange { index: q, n });
            }
            let bit = 1u64 << q;
            match p {
                Pauli::I => {}
                Pauli::X => s.x |= bit,
                Pauli::Y => {
                    s.x |= bit;
                    s.z |= bit;
                }
                Pauli::Z => s.z |= bit,
            }
        }
        Ok(s)
    }

    /// Parse a letter pattern like `"IXYZ"`; index 0 is the first character.
    pub fn from_letters(letters: &str, coeff: Complex64) -> Result<Self, PauliError> {
        let n = letters.chars().count();
        if n > MAX_QUBITS {
            return Err(PauliError::TooWide(n));
        }
        let mut s = PauliString::identity(n, coeff);
        for (q, c) in letters.chars().enumerate() {
            let bit = 1u64 << q;
            match c {
                'I' => {}
                'X' => s.x |= bit,
                'Y' => {
                    s.x |= bit;
                    s.z |= bit;
                }
                'Z' => s.z |= bit,
                other => return Err(PauliError::InvalidLetter(other)),
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn letter(&self, q: usize) -> Pauli {
        let bit = 1u64 << q;
        match ((self.x & bit) != 0, (self.z & bit) != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letters(&self) -> String {
        (0..self.n)
            .map(|q| match self.letter(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }

    #[inline]
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity_pattern(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Letterwise product with phase bookkeeping.
    ///
    /// With `letter = i^{x·z} X^x Z^z` per qubit, the product phase is
    /// `i^(y1 + y2 - y3 + 2·|z1&x2|)` where `y` counts Y letters.
    pub fn product(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.n != other.n {
            return Err(PauliError::WidthMismatch { left: self.n, right: other.n });
        }
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let y1 = (self.x & self.z).count_ones() as i64;
        let y2 = (other.x & other.z).count_ones() as i64;
        let y3 = (x3 & z3).count_ones() as i64;
        let cross = (self.z & other.x).count_ones() as i64;
        let exponent = (y1 + y2 - y3 + 2 * cross).rem_euclid(4);
        let phase = match exponent {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Ok(PauliString { coeff: self.coeff * other.coeff * phase, n: self.n, x: x3, z: z3 })
    }

    /// Action on a computational basis state: `P|b⟩ = phase · |b ^ x⟩`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (u64, Complex64) {
        let y_count = (self.x & self.z).count_ones();
        let sign_flips = (b & self.z).count_ones();
        let exponent = (y_count + 2 * sign_flips) % 4;
        let phase = match exponent {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        (b ^ self.x, self.coeff * phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.6e}{:+.6e}i)·{}", self.coeff.re, self.coeff.im, self.letters())
    }
}

/// A sum of Pauli strings, merged by letter pattern.
///
/// No two terms share a pattern, and terms with |coeff| < 1e-12 are dropped.
/// Terms are kept sorted by `(z, x)` masks so the representation (and any
/// serialization of it) is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: vec![] }
    }

    pub fn from_terms(n: usize, terms: Vec<PauliString>) -> Result<Self, PauliError> {
        let mut sum = PauliSum::zero(n);
        for t in terms {
            sum.add_string(&t)?;
        }
        sum.normalize();
        Ok(sum)
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add a single string (no merge threshold applied until `normalize`).
    fn add_string(&mut self, s: &PauliString) -> Result<(), PauliError> {
        if s.n != self.n {
            return Err(PauliError::WidthMismatch { left: self.n, right: s.n });
        }
        match self.terms.binary_search_by(|t| (t.z, t.x).cmp(&(s.z, s.x))) {
            Ok(i) => self.terms[i].coeff += s.coeff,
            Err(i) => self.terms.insert(i, s.clone()),
        }
        Ok(())
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| t.coeff.norm() >= MERGE_THRESHOLD);
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.n != other.n {
            return Err(PauliError::WidthMismatch { left: self.n, right: other.n });
        }
        let mut out = self.clone();
        for t in &other.terms {
            out.add_string(t)?;
        }
        out.normalize();
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out.normalize();
        out
    }

    pub fn product(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.n != other.n {
            return Err(PauliError::WidthMismatch { left: self.n, right: other.n });
        }
        let mut acc: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let p = a.product(b)?;
                *acc.entry((p.z, p.x)).or_insert(Complex64::new(0.0, 0.0)) += p.coeff;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= MERGE_THRESHOLD)
            .map(|((z, x), coeff)| PauliString { coeff, n: self.n, x, z })
            .collect();
        Ok(PauliSum { n: self.n, terms })
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        let ab = self.product(other)?;
        let ba = other.product(self)?;
        ab.add(&ba.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Hermitian iff every merged coefficient is real (Pauli strings are
    /// Hermitian themselves).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    pub fn max_imag_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0f64, |m, t| m.max(t.coeff.im.abs()))
    }

    /// Debug serialization: one `<re> <im> <letters>` line per term.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{} {} {}\n", t.coeff.re, t.coeff.im, t.letters()));
        }
        out
    }

    pub fn from_lines(text: &str) -> Result<PauliSum, PauliError> {
        let mut terms = vec![];
        let mut n = 0;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let re: f64 = it.next().and_then(|s| s.parse().ok()).unwrap_or(0.0);
            let im: f64 = it.next().and_then(|s| s.parse().ok()).unwrap_or(0.0);
            let letters = it.next().unwrap_or("");
            let s = PauliString::from_letters(letters, Complex64::new(re, im))?;
            n = n.max(s.n);
            terms.push(s);
        }
        PauliSum::from_terms(n, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_xx_is_identity() {
        let x = PauliString::from_letters("X", c(1.0, 0.0)).unwrap();
        let p = x.product(&x).unwrap();
        assert!(p.is_identity_pattern());
        assert!((p.coeff - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn product_xy_is_iz() {
        let x = PauliString::from_letters("X", c(1.0, 0.0)).unwrap();
        let y = PauliString::from_letters("Y", c(1.0, 0.0)).unwrap();
        let p = x.product(&y).unwrap();
        assert_eq!(p.letters(), "Z");
        assert!((p.coeff - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn product_phase_bookkeeping_across_qubits() {
        // (Z⊗X)·(X⊗Z) = (Z·X)⊗(X·Z) = (iY)⊗(−iY) = Y⊗Y
        let a = PauliString::from_letters("ZX", c(1.0, 0.0)).unwrap();
        let b = PauliString::from_letters("XZ", c(1.0, 0.0)).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.letters(), "YY");
        assert!((p.coeff - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let a = PauliString::from_letters("X", c(1.0, 0.0)).unwrap();
        let b = PauliString::from_letters("XX", c(1.0, 0.0)).unwrap();
        assert!(matches!(a.product(&b), Err(PauliError::WidthMismatch { .. })));
    }

    #[test]
    fn merge_collapses_identical_patterns() {
        let a = PauliString::from_letters("XZ", c(0.5, 0.0)).unwrap();
        let b = PauliString::from_letters("XZ", c(0.25, 0.0)).unwrap();
        let s = PauliSum::from_terms(2, vec![a, b]).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.terms()[0].coeff - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn merge_drops_cancelled_terms() {
        let a = PauliString::from_letters("Y", c(0.5, 0.0)).unwrap();
        let b = PauliString::from_letters("Y", c(-0.5, 0.0)).unwrap();
        let s = PauliSum::from_terms(1, vec![a, b]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn lines_round_trip() {
        let a = PauliString::from_letters("XIZY", c(0.125, -2.0)).unwrap();
        let b = PauliString::from_letters("IIII", c(-3.5, 0.0)).unwrap();
        let s = PauliSum::from_terms(4, vec![a, b]).unwrap();
        let back = PauliSum::from_lines(&s.to_lines()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn basis_action_phases() {
        // Z|1⟩ = −|1⟩
        let z = PauliString::from_letters("Z", c(1.0, 0.0)).unwrap();
        let (b, ph) = z.apply_to_basis(1);
        assert_eq!(b, 1);
        assert!((ph - c(-1.0, 0.0)).norm() < 1e-15);
        // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
        let y = PauliString::from_letters("Y", c(1.0, 0.0)).unwrap();
        let (b0, p0) = y.apply_to_basis(0);
        assert_eq!(b0, 1);
        assert!((p0 - c(0.0, 1.0)).norm() < 1e-15);
        let (b1, p1) = y.apply_to_basis(1);
        assert_eq!(b1, 0);
        assert!((p1 - c(0.0, -1.0)).norm() < 1e-15);
    }
}

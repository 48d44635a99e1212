//! Dense statevector simulation with exact expectation values and seeded
//! computational-basis sampling.
//!
//! Qubit `q` is bit `q` of the basis index. Gate application mutates the
//! owned amplitude vector in place with amplitude-pair stride kernels; the
//! dense representation is capped at 24 qubits.

use crate::circuit::{Circuit, Gate};
use crate::pauli::PauliSum;
use num_complex::Complex64;
use rand::Rng;
use rand_pcg::Pcg64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Dense simulation cap; beyond this the amplitude vector is no longer a
/// desk-scale object.
pub const MAX_SIM_QUBITS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum SimulatorError {
    #[error("{0} qubits exceed the dense simulator cap of {MAX_SIM_QUBITS}")]
    TooManyQubits(usize),
    #[error("width mismatch: state has {state} qubits, operator has {operator}")]
    WidthMismatch { state: usize, operator: usize },
    #[error("operator is not Hermitian (max imaginary coefficient {0:e})")]
    NotHermitian(f64),
    #[error("operator matrix is not real in the computational basis (residue {0:e})")]
    NotRealMatrix(f64),
    #[error("shot count must be at least 1")]
    ZeroShots,
}

/// Normalized complex amplitude vector over `2^n` basis states.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero_state(n: usize) -> Result<Self, SimulatorError> {
        if n > MAX_SIM_QUBITS {
            return Err(SimulatorError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Computational basis state `|pattern⟩`.
    pub fn basis_state(n: usize, pattern: u64) -> Result<Self, SimulatorError> {
        let mut sv = StateVector::zero_state(n)?;
        sv.amps[0] = Complex64::new(0.0, 0.0);
        sv.amps[pattern as usize] = Complex64::new(1.0, 0.0);
        Ok(sv)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[inline]
    fn apply_one_qubit(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0usize;
        while base < dim {
            for offset in base..base + bit {
                let i0 = offset;
                let i1 = offset | bit;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += bit << 1;
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::X(q) => {
                let bit = 1usize << q;
                let dim = self.amps.len();
                let mut base = 0usize;
                while base < dim {
                    for offset in base..base + bit {
                        self.amps.swap(offset, offset | bit);
                    }
                    base += bit << 1;
                }
            }
            Gate::H(q) => {
                let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_one_qubit(q, [[s, s], [s, -s]]);
            }
            Gate::Rx(q, t) => {
                let c = Complex64::new((t / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(t / 2.0).sin());
                self.apply_one_qubit(q, [[c, s], [s, c]]);
            }
            Gate::Ry(q, t) => {
                let c = Complex64::new((t / 2.0).cos(), 0.0);
                let s = Complex64::new((t / 2.0).sin(), 0.0);
                self.apply_one_qubit(q, [[c, -s], [s, c]]);
            }
            Gate::Rz(q, t) => {
                let bit = 1usize << q;
                let lo = Complex64::from_polar(1.0, -t / 2.0);
                let hi = Complex64::from_polar(1.0, t / 2.0);
                for (idx, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if idx & bit == 0 { lo } else { hi };
                }
            }
            Gate::P(q, t) => {
                let bit = 1usize << q;
                let hi = Complex64::from_polar(1.0, t);
                for (idx, amp) in self.amps.iter_mut().enumerate() {
                    if idx & bit != 0 {
                        *amp *= hi;
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let cbit = 1usize << c;
                let tbit = 1usize << t;
                for idx in 0..self.amps.len() {
                    if idx & cbit != 0 && idx & tbit == 0 {
                        self.amps.swap(idx, idx | tbit);
                    }
                }
            }
        }
    }

    /// Apply every gate of `c` in order.
    pub fn apply(&mut self, c: &Circuit) -> Result<(), SimulatorError> {
        if c.n_qubits != self.n {
            return Err(SimulatorError::WidthMismatch { state: self.n, operator: c.n_qubits });
        }
        for g in &c.gates {
            self.apply_gate(g);
        }
        Ok(())
    }

    /// `⟨ψ|H|ψ⟩` for Hermitian `H`; the imaginary residue stays below 1e-10
    /// and is discarded.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64, SimulatorError> {
        if h.n != self.n {
            return Err(SimulatorError::WidthMismatch { state: self.n, operator: h.n });
        }
        if !h.is_hermitian(1e-10) {
            return Err(SimulatorError::NotHermitian(h.max_imag_coeff()));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for term in h.terms() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, amp) in self.amps.iter().enumerate() {
                if amp.re == 0.0 && amp.im == 0.0 {
                    continue;
                }
                let (b2, phase) = term.apply_to_basis(b as u64);
                acc += self.amps[b2 as usize].conj() * phase * amp;
            }
            total += acc;
        }
        Ok(total.re)
    }

    /// Seeded i.i.d. sampling of computational-basis patterns.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<DeterminantMultiset, SimulatorError> {
        if shots == 0 {
            return Err(SimulatorError::ZeroShots);
        }
        let cumulative: Vec<f64> = {
            let mut cum = Vec::with_capacity(self.amps.len());
            let mut acc = 0.0;
            for a in &self.amps {
                acc += a.norm_sqr();
                cum.push(acc);
            }
            cum
        };
        let total = *cumulative.last().unwrap();
        let mut rng = Pcg64::new(seed as u128, 0xa02bdbf7bb3c0a7ac28fa16a64abf96);
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(self.amps.len() - 1);
            *counts.entry(idx as u64).or_insert(0) += 1;
        }
        Ok(DeterminantMultiset { counts, shots, n: self.n })
    }
}

/// `A|ψ⟩` for an arbitrary Pauli sum (no Hermiticity assumed).
pub fn apply_pauli_sum(a: &PauliSum, psi: &StateVector) -> Result<StateVector, SimulatorError> {
    if a.n != psi.n {
        return Err(SimulatorError::WidthMismatch { state: psi.n, operator: a.n });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
    for term in a.terms() {
        for (b, amp) in psi.amps.iter().enumerate() {
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let (b2, phase) = term.apply_to_basis(b as u64);
            out[b2 as usize] += phase * amp;
        }
    }
    Ok(StateVector { n: psi.n, amps: out })
}

/// Computational-basis samples with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminantMultiset {
    pub counts: BTreeMap<u64, usize>,
    pub shots: usize,
    pub n: usize,
}

impl DeterminantMultiset {
    /// `pattern count` lines; patterns rendered with qubit 0 as the first
    /// character.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (&pattern, &count) in &self.counts {
            let bits: String =
                (0..self.n).map(|q| if pattern & (1 << q) != 0 { '1' } else { '0' }).collect();
            out.push_str(&format!("{bits} {count}\n"));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Sparse Hamiltonian for repeated expectation evaluation
// ---------------------------------------------------------------------------

/// CSR matrix form of a Hermitian, real-coefficient Pauli sum.
///
/// Each Pauli term is a permutation-with-phase matrix, so rows have one entry
/// per distinct X-mask; with an even number of Y letters per term (always the
/// case for a fermionic Hamiltonian) all entries are real.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    pub n: usize,
    row_ptr: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn from_pauli_sum(h: &PauliSum) -> Result<Self, SimulatorError> {
        if h.n > MAX_SIM_QUBITS {
            return Err(SimulatorError::TooManyQubits(h.n));
        }
        if !h.is_hermitian(1e-10) {
            return Err(SimulatorError::NotHermitian(h.max_imag_coeff()));
        }
        let dim = 1usize << h.n;
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols: Vec<u32> = vec![];
        let mut vals: Vec<f64> = vec![];
        row_ptr.push(0u32);
        let mut entries: Vec<(u32, Complex64)> = vec![];
        for row in 0..dim {
            entries.clear();
            for term in h.terms() {
                // H[row][col] = ⟨row|P|col⟩: apply P to |col⟩ where col = row ^ x
                let col = (row as u64) ^ term.x_mask();
                let (b2, phase) = term.apply_to_basis(col);
                debug_assert_eq!(b2, row as u64);
                entries.push((col as u32, phase));
            }
            entries.sort_unstable_by_key(|e| e.0);
            let mut merged: Vec<(u32, Complex64)> = Vec::with_capacity(entries.len());
            for &(c, v) in entries.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v.im.abs() > 1e-12 {
                    return Err(SimulatorError::NotRealMatrix(v.im.abs()));
                }
                if v.re.abs() > 1e-14 {
                    cols.push(c);
                    vals.push(v.re);
                }
            }
            row_ptr.push(cols.len() as u32);
        }
        Ok(SparseHamiltonian { n: h.n, row_ptr, cols, vals })
    }

    /// `⟨ψ|H|ψ⟩`, skipping rows whose amplitude vanishes.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let mut acc = 0.0;
        for row in 0..self.amp_dim() {
            let a = psi.amps[row];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let start = self.row_ptr[row] as usize;
            let end = self.row_ptr[row + 1] as usize;
            let mut hrow = Complex64::new(0.0, 0.0);
            for k in start..end {
                hrow += psi.amps[self.cols[k] as usize] * self.vals[k];
            }
            acc += (a.conj() * hrow).re;
        }
        acc
    }

    /// `H|ψ⟩`.
    pub fn matvec(&self, psi: &StateVector) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
        for (row, slot) in out.iter_mut().enumerate() {
            let start = self.row_ptr[row] as usize;
            let end = self.row_ptr[row + 1] as usize;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in start..end {
                acc += psi.amps[self.cols[k] as usize] * self.vals[k];
            }
            *slot = acc;
        }
        StateVector { n: psi.n, amps: out }
    }

    fn amp_dim(&self) -> usize {
        1usize << self.n
    }
}

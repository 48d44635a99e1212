//! Second-quantized Hamiltonians over spatial orbitals.
//!
//! Integrals are ingested from FCIDUMP text (the only interchange format this
//! crate supports; spatial orbitals with a restricted reference). The two-body
//! tensor is stored dense in chemists' notation `(pq|rs)` with full 8-fold
//! permutational symmetry. All energies are in Hartree.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Tolerance for validating integral symmetry on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Duplicate FCIDUMP records must agree to this tolerance.
pub const DUPLICATE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("malformed FCIDUMP header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("line {line}: orbital index {index} out of range (NORB={norb})")]
    IndexOutOfRange { line: usize, index: usize, norb: usize },
    #[error("line {line}: conflicting duplicate record ({previous} vs {new})")]
    ConflictingDuplicate { line: usize, previous: f64, new: f64 },
    #[error("one-body matrix not symmetric: |h[{p}][{q}] - h[{q}][{p}]| = {delta}")]
    AsymmetricOneBody { p: usize, q: usize, delta: f64 },
    #[error("two-body tensor violates 8-fold symmetry at ({p}{q}|{r}{s}): delta = {delta}")]
    AsymmetricTwoBody { p: usize, q: usize, r: usize, s: usize, delta: f64 },
    #[error("electron counts ({n_alpha}, {n_beta}) exceed capacity of {n_orbitals} orbitals")]
    TooManyElectrons { n_alpha: usize, n_beta: usize, n_orbitals: usize },
    #[error("occupation index {0} out of orbital range {1}")]
    OccupationOutOfRange(usize, usize),
    #[error("invalid active-space spec: {0}")]
    InvalidActiveSpace(String),
    #[error("missing energy component '{0}'")]
    MissingComponent(String),
    #[error("energy component '{0}' is not finite")]
    NonFiniteComponent(String),
    #[error("rotation matrix is not orthogonal (deviation {0})")]
    NotOrthogonal(f64),
    #[error("rotation dimension {0} does not match orbital count {1}")]
    RotationDimension(usize, usize),
}

/// Dense two-body tensor in chemists' notation.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBody {
    n: usize,
    data: Vec<f64>,
}

impl TwoBody {
    pub fn zeros(n: usize) -> Self {
        TwoBody { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[((p * self.n + q) * self.n + r) * self.n + s]
    }

    #[inline]
    pub fn set_raw(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        self.data[((p * self.n + q) * self.n + r) * self.n + s] = v;
    }

    /// Set `(pq|rs)` together with all 8 permutational images.
    pub fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for &(a, b, c, d) in &[
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.set_raw(a, b, c, d, v);
        }
    }
}

/// Active-space selection: which orbitals stay correlated and which are
/// folded into the core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSpaceSpec {
    pub frozen_core: Vec<usize>,
    pub active: Vec<usize>,
    pub n_active_electrons: usize,
}

/// Core energy offset, one-body matrix, two-body tensor, and electron counts.
///
/// Immutable after construction; cheap to share across read-only workers.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionHamiltonian {
    pub e_core: f64,
    h: Vec<f64>,
    g: TwoBody,
    pub n_orbitals: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl FermionHamiltonian {
    pub fn new(
        e_core: f64,
        h: Vec<f64>,
        g: TwoBody,
        n_orbitals: usize,
        n_alpha: usize,
        n_beta: usize,
    ) -> Result<Self, HamiltonianError> {
        assert_eq!(h.len(), n_orbitals * n_orbitals);
        assert_eq!(g.n, n_orbitals);
        let ham = FermionHamiltonian { e_core, h, g, n_orbitals, n_alpha, n_beta };
        ham.validate()?;
        Ok(ham)
    }

    fn validate(&self) -> Result<(), HamiltonianError> {
        let n = self.n_orbitals;
        if self.n_alpha + self.n_beta > 2 * n {
            return Err(HamiltonianError::TooManyElectrons {
                n_alpha: self.n_alpha,
                n_beta: self.n_beta,
                n_orbitals: n,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let delta = (self.h_elem(p, q) - self.h_elem(q, p)).abs();
                if delta > SYMMETRY_TOL {
                    return Err(HamiltonianError::AsymmetricOneBody { p, q, delta });
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g.get(p, q, r, s);
                        for &(a, b, c, d) in &[(q, p, r, s), (p, q, s, r), (r, s, p, q)] {
                            let delta = (v - self.g.get(a, b, c, d)).abs();
                            if delta > SYMMETRY_TOL {
                                return Err(HamiltonianError::AsymmetricTwoBody {
                                    p,
                                    q,
                                    r,
                                    s,
                                    delta,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn h_elem(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_orbitals + q]
    }

    /// Chemists' `(pq|rs)`.
    #[inline]
    pub fn g_elem(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g.get(p, q, r, s)
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_orbitals
    }

    /// Closed-form energy of a single determinant with the given spatial
    /// occupations per spin.
    pub fn hf_energy(
        &self,
        occ_alpha: &[usize],
        occ_beta: &[usize],
    ) -> Result<f64, HamiltonianError> {
        for &i in occ_alpha.iter().chain(occ_beta.iter()) {
            if i >= self.n_orbitals {
                return Err(HamiltonianError::OccupationOutOfRange(i, self.n_orbitals));
            }
        }
        let mut e = self.e_core;
        for &i in occ_alpha {
            e += self.h_elem(i, i);
        }
        for &i in occ_beta {
            e += self.h_elem(i, i);
        }
        // same-spin Coulomb − exchange
        for occ in [occ_alpha, occ_beta] {
            for &i in occ {
                for &j in occ {
                    e += 0.5 * (self.g_elem(i, i, j, j) - self.g_elem(i, j, j, i));
                }
            }
        }
        // opposite-spin Coulomb (both orderings, hence no 1/2)
        for &i in occ_alpha {
            for &j in occ_beta {
                e += self.g_elem(i, i, j, j);
            }
        }
        Ok(e)
    }

    /// Reference determinant energy: lowest-index orbitals occupied.
    pub fn reference_energy(&self) -> f64 {
        let occ_a: Vec<usize> = (0..self.n_alpha).collect();
        let occ_b: Vec<usize> = (0..self.n_beta).collect();
        self.hf_energy(&occ_a, &occ_b).expect("reference occupation in range")
    }

    /// Fold doubly-occupied frozen orbitals into the core and restrict the
    /// integrals to the active orbitals (in the order given by `spec.active`).
    pub fn fold_core(&self, spec: &ActiveSpaceSpec) -> Result<FermionHamiltonian, HamiltonianError> {
        let n = self.n_orbitals;
        for &i in spec.frozen_core.iter().chain(spec.active.iter()) {
            if i >= n {
                return Err(HamiltonianError::InvalidActiveSpace(format!(
                    "orbital index {i} out of range (n_orbitals={n})"
                )));
            }
        }
        for &i in &spec.frozen_core {
            if spec.active.contains(&i) {
                return Err(HamiltonianError::InvalidActiveSpace(format!(
                    "orbital {i} is both frozen and active"
                )));
            }
        }
        let mut seen = vec![false; n];
        for &i in spec.frozen_core.iter().chain(spec.active.iter()) {
            if seen[i] {
                return Err(HamiltonianError::InvalidActiveSpace(format!(
                    "orbital {i} listed twice"
                )));
            }
            seen[i] = true;
        }
        let nf = spec.frozen_core.len();
        if self.n_alpha < nf || self.n_beta < nf {
            return Err(HamiltonianError::InvalidActiveSpace(
                "frozen orbitals must be doubly occupied in the reference".into(),
            ));
        }
        let n_alpha_act = self.n_alpha - nf;
        let n_beta_act = self.n_beta - nf;
        if n_alpha_act + n_beta_act != spec.n_active_electrons {
            return Err(HamiltonianError::InvalidActiveSpace(format!(
                "active electron count {} inconsistent with {} frozen orbitals ({} expected)",
                spec.n_active_electrons,
                nf,
                n_alpha_act + n_beta_act
            )));
        }

        let frozen = &spec.frozen_core;
        let mut e_core = self.e_core;
        for &i in frozen {
            e_core += 2.0 * self.h_elem(i, i);
        }
        for &i in frozen {
            for &j in frozen {
                e_core += 2.0 * self.g_elem(i, i, j, j) - self.g_elem(i, j, j, i);
            }
        }

        let na = spec.active.len();
        let mut h = vec![0.0; na * na];
        for (a, &p) in spec.active.iter().enumerate() {
            for (b, &q) in spec.active.iter().enumerate() {
                let mut v = self.h_elem(p, q);
                for &i in frozen {
                    v += 2.0 * self.g_elem(p, q, i, i) - self.g_elem(p, i, i, q);
                }
                h[a * na + b] = v;
            }
        }

        let mut g = TwoBody::zeros(na);
        for (a, &p) in spec.active.iter().enumerate() {
            for (b, &q) in spec.active.iter().enumerate() {
                for (c, &r) in spec.active.iter().enumerate() {
                    for (d, &s) in spec.active.iter().enumerate() {
                        g.set_raw(a, b, c, d, self.g_elem(p, q, r, s));
                    }
                }
            }
        }

        FermionHamiltonian::new(e_core, h, g, na, n_alpha_act, n_beta_act)
    }

    /// One- and two-body integral transform by an orthogonal orbital rotation
    /// `U` (column `j` holds the new orbital `j` in the old basis).
    pub fn rotate_orbitals(&self, u: &[Vec<f64>]) -> Result<FermionHamiltonian, HamiltonianError> {
        let n = self.n_orbitals;
        if u.len() != n || u.iter().any(|row| row.len() != n) {
            return Err(HamiltonianError::RotationDimension(u.len(), n));
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| u[k][i] * u[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        if worst > 1e-8 {
            return Err(HamiltonianError::NotOrthogonal(worst));
        }

        let mut h = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let mut v = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        v += u[a][p] * u[b][q] * self.h_elem(a, b);
                    }
                }
                h[p * n + q] = v;
            }
        }

        // four staged quarter-transforms, one index at a time
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        let mut t = self.g.data.clone();
        for stage in 0..4 {
            let mut next = vec![0.0; n * n * n * n];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let v = t[idx(a, b, c, d)];
                            if v == 0.0 {
                                continue;
                            }
                            match stage {
                                0 => {
                                    for p in 0..n {
                                        next[idx(p, b, c, d)] += u[a][p] * v;
                                    }
                                }
                                1 => {
                                    for p in 0..n {
                                        next[idx(a, p, c, d)] += u[b][p] * v;
                                    }
                                }
                                2 => {
                                    for p in 0..n {
                                        next[idx(a, b, p, d)] += u[c][p] * v;
                                    }
                                }
                                _ => {
                                    for p in 0..n {
                                        next[idx(a, b, c, p)] += u[d][p] * v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            t = next;
        }
        // clean tiny asymmetries introduced by floating-point accumulation
        let mut g = TwoBody::zeros(n);
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if (p * n + q) < (r * n + s) {
                            continue;
                        }
                        let perms = [
                            (p, q, r, s),
                            (q, p, r, s),
                            (p, q, s, r),
                            (q, p, s, r),
                            (r, s, p, q),
                            (s, r, p, q),
                            (r, s, q, p),
                            (s, r, q, p),
                        ];
                        let avg: f64 =
                            perms.iter().map(|&(a, b, c, d)| t[idx(a, b, c, d)]).sum::<f64>() / 8.0;
                        g.set_symmetric(p, q, r, s, avg);
                    }
                }
            }
        }
        FermionHamiltonian::new(self.e_core, h, g, n, self.n_alpha, self.n_beta)
    }
}

// ---------------------------------------------------------------------------
// FCIDUMP interchange
// ---------------------------------------------------------------------------

/// Parse FCIDUMP text: namelist header (`&FCI NORB=, NELEC=, MS2=`), then
/// whitespace-separated `value i j k l` records with 1-based indices.
pub fn parse_fcidump(text: &str) -> Result<FermionHamiltonian, HamiltonianError> {
    let mut lines = text.lines().enumerate();

    let mut header = String::new();
    let mut header_done = false;
    let mut body_start = 0usize;
    for (lineno, line) in lines.by_ref() {
        let t = line.trim();
        if header.is_empty() && !t.starts_with("&FCI") {
            return Err(HamiltonianError::MalformedHeader(format!(
                "expected '&FCI' namelist, found '{t}'"
            )));
        }
        header.push(' ');
        header.push_str(t);
        if t.contains("&END") || t.ends_with('/') || t.contains("/ ") || t == "/" {
            header_done = true;
            body_start = lineno + 1;
            break;
        }
    }
    if !header_done {
        return Err(HamiltonianError::MalformedHeader("unterminated namelist".into()));
    }
    let header = header.replace("&FCI", " ").replace("&END", " ").replace('/', " ");

    let mut norb: Option<usize> = None;
    let mut nelec: Option<usize> = None;
    let mut ms2: i64 = 0;
    // split KEY=VALUE pairs; array-valued keys (ORBSYM) are skipped
    let cleaned = header.replace(',', " ");
    let mut tokens = cleaned.split_whitespace().peekable();
    while let Some(tok) = tokens.next() {
        let (key, value) = match tok.split_once('=') {
            Some((k, v)) => (k.trim().to_uppercase(), v.trim().to_string()),
            None => continue,
        };
        let value = if value.is_empty() {
            tokens.next().unwrap_or("").to_string()
        } else {
            value
        };
        match key.as_str() {
            "NORB" => {
                norb = Some(value.parse().map_err(|_| {
                    HamiltonianError::MalformedHeader(format!("bad NORB value '{value}'"))
                })?)
            }
            "NELEC" => {
                nelec = Some(value.parse().map_err(|_| {
                    HamiltonianError::MalformedHeader(format!("bad NELEC value '{value}'"))
                })?)
            }
            "MS2" => {
                ms2 = value.parse().map_err(|_| {
                    HamiltonianError::MalformedHeader(format!("bad MS2 value '{value}'"))
                })?
            }
            _ => {}
        }
    }
    let norb = norb.ok_or_else(|| HamiltonianError::MalformedHeader("missing NORB".into()))?;
    let nelec = nelec.ok_or_else(|| HamiltonianError::MalformedHeader("missing NELEC".into()))?;
    if (nelec as i64 + ms2) % 2 != 0 || (nelec as i64) < ms2.abs() {
        return Err(HamiltonianError::MalformedHeader(format!(
            "inconsistent NELEC={nelec} and MS2={ms2}"
        )));
    }
    let n_alpha = ((nelec as i64 + ms2) / 2) as usize;
    let n_beta = ((nelec as i64 - ms2) / 2) as usize;

    let mut e_core = 0.0f64;
    let mut e_core_set: Option<f64> = None;
    let mut h = vec![0.0f64; norb * norb];
    let mut h_set: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut g = TwoBody::zeros(norb);
    let mut g_set: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();

    for (lineno, line) in text.lines().enumerate().skip(body_start) {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(HamiltonianError::BadRecord {
                line: lineno + 1,
                message: format!("expected 'value i j k l', found {} fields", fields.len()),
            });
        }
        let value: f64 = fields[0].parse().map_err(|_| HamiltonianError::BadRecord {
            line: lineno + 1,
            message: format!("bad value '{}'", fields[0]),
        })?;
        let mut idx = [0usize; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            idx[k] = f.parse().map_err(|_| HamiltonianError::BadRecord {
                line: lineno + 1,
                message: format!("bad index '{f}'"),
            })?;
        }
        for &i in &idx {
            if i > norb {
                return Err(HamiltonianError::IndexOutOfRange {
                    line: lineno + 1,
                    index: i,
                    norb,
                });
            }
        }
        match idx {
            [0, 0, 0, 0] => {
                if let Some(prev) = e_core_set {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(HamiltonianError::ConflictingDuplicate {
                            line: lineno + 1,
                            previous: prev,
                            new: value,
                        });
                    }
                } else {
                    e_core = value;
                    e_core_set = Some(value);
                }
            }
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let key = (i.min(j) - 1, i.max(j) - 1);
                if let Some(&prev) = h_set.get(&key) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(HamiltonianError::ConflictingDuplicate {
                            line: lineno + 1,
                            previous: prev,
                            new: value,
                        });
                    }
                } else {
                    h_set.insert(key, value);
                    h[key.0 * norb + key.1] = value;
                    h[key.1 * norb + key.0] = value;
                }
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                let canon = canonical_g_key(p, q, r, s);
                if let Some(&prev) = g_set.get(&canon) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(HamiltonianError::ConflictingDuplicate {
                            line: lineno + 1,
                            previous: prev,
                            new: value,
                        });
                    }
                } else {
                    g_set.insert(canon, value);
                    g.set_symmetric(p, q, r, s, value);
                }
            }
            _ => {
                return Err(HamiltonianError::BadRecord {
                    line: lineno + 1,
                    message: format!("unsupported index pattern {idx:?}"),
                });
            }
        }
    }

    FermionHamiltonian::new(e_core, h, g, norb, n_alpha, n_beta)
}

fn canonical_g_key(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let pq = (p.max(q), p.min(q));
    let rs = (r.max(s), r.min(s));
    let (left, right) = if pq >= rs { (pq, rs) } else { (rs, pq) };
    (left.0, left.1, right.0, right.1)
}

/// Serialize to FCIDUMP text; `parse_fcidump` round-trips the result exactly
/// (values are written with 17 significant digits).
pub fn serialize_fcidump(h: &FermionHamiltonian) -> String {
    let n = h.n_orbitals;
    let nelec = h.n_electrons();
    let ms2 = h.n_alpha as i64 - h.n_beta as i64;
    let orbsym = vec!["1"; n].join(",");
    let mut out = format!("&FCI NORB={n},NELEC={nelec},MS2={ms2},\n ORBSYM={orbsym},\n ISYM=1,\n&END\n");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    let v = h.g_elem(p, q, r, s);
                    if v != 0.0 {
                        out.push_str(&format!(
                            " {:.16E} {} {} {} {}\n",
                            v,
                            p + 1,
                            q + 1,
                            r + 1,
                            s + 1
                        ));
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = h.h_elem(p, q);
            if v != 0.0 {
                out.push_str(&format!(" {:.16E} {} {} 0 0\n", v, p + 1, q + 1));
            }
        }
    }
    out.push_str(&format!(" {:.16E} 0 0 0 0\n", h.e_core));
    out
}

// ---------------------------------------------------------------------------
// Multi-layer energy combination
// ---------------------------------------------------------------------------

/// Named energy components (Hartree), ingested as a flat JSON object.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EnergyLedger(pub BTreeMap<String, f64>);

impl EnergyLedger {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let map: BTreeMap<String, f64> = serde_json::from_str(text)?;
        Ok(EnergyLedger(map))
    }

    pub fn get(&self, name: &str) -> Result<f64, HamiltonianError> {
        let v = self
            .0
            .get(name)
            .copied()
            .ok_or_else(|| HamiltonianError::MissingComponent(name.into()))?;
        if !v.is_finite() {
            return Err(HamiltonianError::NonFiniteComponent(name.into()));
        }
        Ok(v)
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.into(), value);
    }
}

/// `E_QM_region = E_EMB[Ψ_A] + E_DFT[D_A + D_B] − E_DFT[D_A]`.
pub fn wf_in_dft_energy(ledger: &EnergyLedger) -> Result<f64, HamiltonianError> {
    Ok(ledger.get("e_emb_psi_a")? + ledger.get("e_dft_total")? - ledger.get("e_dft_a")?)
}

/// `E_tot = E_MM_full − E_MM_region + E_QM_region`, with the QM term taken
/// from the ledger when present and otherwise assembled by [`wf_in_dft_energy`].
pub fn oniom_total(ledger: &EnergyLedger) -> Result<f64, HamiltonianError> {
    let e_qm = match ledger.get("e_qm_region") {
        Ok(v) => v,
        Err(HamiltonianError::MissingComponent(_)) => wf_in_dft_energy(ledger)?,
        Err(e) => return Err(e),
    };
    Ok(ledger.get("e_mm_full")? - ledger.get("e_mm_region")? + e_qm)
}

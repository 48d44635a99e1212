//! Fragment orbital assignment and natural-virtual selection.
//!
//! Occupied localized orbitals are ranked by the coefficient weight
//! `w_i = Σ_{a∈A} Σ_{μ∈B_a} |C_μi|`; the fragment orbital count comes from
//! the per-orbital argmax map `f(i)`. Virtuals are compressed through a
//! subspace MP2 calculation: spin-orbital amplitudes over an occupied window
//! feed the virtual correlation density `d_ab = Σ_cij t_ij^ac t_ij^cb`,
//! whose eigenvectors (ordered by absolute eigenvalue) define the natural
//! virtuals. Orbital energies for the MP2 denominators are the diagonal of
//! the Fock matrix rebuilt from the ingested integrals, since FCIDUMP
//! carries none.

use crate::hamiltonian::{FermionHamiltonian, HamiltonianError};
use crate::linalg::{symmetric_eigen, SymMatrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrbitalError {
    #[error("fragment atom set is empty; ranking is undefined")]
    EmptyFragment,
    #[error("atom {0} not present in the AO map")]
    UnknownAtom(usize),
    #[error("AO map does not partition the AO rows: {0}")]
    BadAoMap(String),
    #[error("requested {requested} orbitals but only {available} occupied exist")]
    TooManyOrbitals { requested: usize, available: usize },
    #[error("occupied window and virtual set must be disjoint (orbital {0})")]
    WindowOverlap(usize),
    #[error("orbital index {0} out of range {1}")]
    OutOfRange(usize, usize),
    #[error("degenerate orbitals: MP2 denominator |{0:e}| below 1e-10")]
    DegenerateDenominator(f64),
    #[error("subspace MP2 requires a closed-shell reference (n_alpha = n_beta)")]
    OpenShell,
    #[error("requested {requested} natural virtuals but only {available} exist")]
    TooManyVirtuals { requested: usize, available: usize },
    #[error("coefficient matrix shape mismatch: {0}")]
    BadShape(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Localized MO coefficients. Rows are atomic orbitals, columns molecular
/// orbitals; raw coefficient magnitudes are used as weights (no AO overlap
/// metric is applied).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoCoefficients {
    pub n_ao: usize,
    pub n_mo: usize,
    pub occupied_count: usize,
    pub coefficients: Vec<Vec<f64>>,
    pub atom_ao_map: BTreeMap<String, Vec<usize>>,
}

impl MoCoefficients {
    pub fn from_json(text: &str) -> Result<Self, OrbitalError> {
        let mo: MoCoefficients =
            serde_json::from_str(text).map_err(|e| OrbitalError::BadShape(e.to_string()))?;
        mo.validate()?;
        Ok(mo)
    }

    pub fn validate(&self) -> Result<(), OrbitalError> {
        if self.coefficients.len() != self.n_ao {
            return Err(OrbitalError::BadShape(format!(
                "expected {} AO rows, found {}",
                self.n_ao,
                self.coefficients.len()
            )));
        }
        for (mu, row) in self.coefficients.iter().enumerate() {
            if row.len() != self.n_mo {
                return Err(OrbitalError::BadShape(format!(
                    "AO row {mu} has {} entries, expected {}",
                    row.len(),
                    self.n_mo
                )));
            }
        }
        if self.occupied_count > self.n_mo {
            return Err(OrbitalError::BadShape(format!(
                "occupied_count {} exceeds n_mo {}",
                self.occupied_count, self.n_mo
            )));
        }
        let mut seen = vec![false; self.n_ao];
        for (atom, aos) in &self.atom_ao_map {
            for &mu in aos {
                if mu >= self.n_ao {
                    return Err(OrbitalError::BadAoMap(format!(
                        "atom {atom} lists AO {mu}, but n_ao = {}",
                        self.n_ao
                    )));
                }
                if seen[mu] {
                    return Err(OrbitalError::BadAoMap(format!("AO {mu} listed twice")));
                }
                seen[mu] = true;
            }
        }
        if let Some(mu) = seen.iter().position(|&s| !s) {
            return Err(OrbitalError::BadAoMap(format!("AO {mu} owned by no atom")));
        }
        Ok(())
    }

    pub fn atoms(&self) -> Vec<usize> {
        let mut atoms: Vec<usize> =
            self.atom_ao_map.keys().filter_map(|k| k.parse().ok()).collect();
        atoms.sort_unstable();
        atoms
    }

    fn atom_aos(&self, atom: usize) -> Option<&[usize]> {
        self.atom_ao_map.get(&atom.to_string()).map(|v| v.as_slice())
    }

    fn atom_weight(&self, atom: usize, orbital: usize) -> f64 {
        self.atom_aos(atom)
            .map(|aos| aos.iter().map(|&mu| self.coefficients[mu][orbital].abs()).sum())
            .unwrap_or(0.0)
    }
}

/// `w_i = Σ_{a∈A} Σ_{μ∈B_a} |C_μi|` for each occupied orbital `i`.
pub fn assignment_weights(
    mo: &MoCoefficients,
    fragment_atoms: &[usize],
) -> Result<Vec<f64>, OrbitalError> {
    if fragment_atoms.is_empty() {
        return Err(OrbitalError::EmptyFragment);
    }
    for &a in fragment_atoms {
        if mo.atom_aos(a).is_none() {
            return Err(OrbitalError::UnknownAtom(a));
        }
    }
    Ok((0..mo.occupied_count)
        .map(|i| fragment_atoms.iter().map(|&a| mo.atom_weight(a, i)).sum())
        .collect())
}

/// `f(i)`: the atom at which occupied orbital `i` has the largest cumulative
/// weight; argmax ties fall to the lowest atom index.
pub fn orbital_home_atoms(mo: &MoCoefficients) -> Vec<usize> {
    let atoms = mo.atoms();
    (0..mo.occupied_count)
        .map(|i| {
            let mut best_atom = atoms[0];
            let mut best = f64::NEG_INFINITY;
            for &a in &atoms {
                let w = mo.atom_weight(a, i);
                if w > best {
                    best = w;
                    best_atom = a;
                }
            }
            best_atom
        })
        .collect()
}

/// `n`: how many occupied orbitals map into the fragment under `f(i)`.
pub fn fragment_orbital_count(
    mo: &MoCoefficients,
    fragment_atoms: &[usize],
) -> Result<usize, OrbitalError> {
    if fragment_atoms.is_empty() {
        return Err(OrbitalError::EmptyFragment);
    }
    for &a in fragment_atoms {
        if mo.atom_aos(a).is_none() {
            return Err(OrbitalError::UnknownAtom(a));
        }
    }
    let homes = orbital_home_atoms(mo);
    Ok(homes.iter().filter(|h| fragment_atoms.contains(h)).count())
}

/// Indices of the `n` largest weights, in descending weight order; equal
/// weights fall to the lower orbital index.
pub fn select_fragment_orbitals(weights: &[f64], n: usize) -> Result<Vec<usize>, OrbitalError> {
    if n > weights.len() {
        return Err(OrbitalError::TooManyOrbitals { requested: n, available: weights.len() });
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    order.truncate(n);
    Ok(order)
}

// ---------------------------------------------------------------------------
// Subspace MP2 and natural virtuals
// ---------------------------------------------------------------------------

/// Spin-orbital MP2 amplitudes over an occupied window and a virtual set.
///
/// Spin orbitals are interleaved within each group: entry `2·p + σ` is
/// spatial position `p` of the group with spin `σ`. `t[i][j][a][b]` is
/// `t_ij^ab = ⟨ij||ab⟩ / (ε_i + ε_j − ε_a − ε_b)`.
#[derive(Debug, Clone)]
pub struct Mp2Amplitudes {
    pub occ_window: Vec<usize>,
    pub virtuals: Vec<usize>,
    pub eps: Vec<f64>,
    t: Vec<f64>,
    n_occ_so: usize,
    n_virt_so: usize,
}

impl Mp2Amplitudes {
    #[inline]
    pub fn t_elem(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.t[((i * self.n_occ_so + j) * self.n_virt_so + a) * self.n_virt_so + b]
    }

    pub fn n_occ_so(&self) -> usize {
        self.n_occ_so
    }

    pub fn n_virt_so(&self) -> usize {
        self.n_virt_so
    }

    pub fn max_abs(&self) -> f64 {
        self.t.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// Fock matrix from the integrals and the reference occupation:
/// `F_pq = h_pq + Σ_{i occ} [2(pq|ii) − (pi|iq)]`.
pub fn fock_matrix(h: &FermionHamiltonian) -> Vec<f64> {
    let n = h.n_orbitals;
    let occ: Vec<usize> = (0..h.n_alpha).collect();
    let mut f = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            let mut v = h.h_elem(p, q);
            for &i in &occ {
                v += 2.0 * h.g_elem(p, q, i, i) - h.g_elem(p, i, i, q);
            }
            f[p * n + q] = v;
        }
    }
    f
}

/// Antisymmetrized spin-orbital integral for the interleaved window layout.
fn anti_so(
    h: &FermionHamiltonian,
    occ: &[usize],
    virt: &[usize],
    i: usize,
    j: usize,
    a: usize,
    b: usize,
) -> f64 {
    let (pi, si) = (occ[i / 2], i % 2);
    let (pj, sj) = (occ[j / 2], j % 2);
    let (pa, sa) = (virt[a / 2], a % 2);
    let (pb, sb) = (virt[b / 2], b % 2);
    let mut v = 0.0;
    if si == sa && sj == sb {
        v += h.g_elem(pi, pa, pj, pb);
    }
    if si == sb && sj == sa {
        v -= h.g_elem(pi, pb, pj, pa);
    }
    v
}

/// Build spin-orbital MP2 amplitudes over the given occupied window and
/// virtual orbitals (spatial indices).
pub fn mp2_amplitudes(
    h: &FermionHamiltonian,
    occ_window: &[usize],
    virtuals: &[usize],
) -> Result<Mp2Amplitudes, OrbitalError> {
    if h.n_alpha != h.n_beta {
        return Err(OrbitalError::OpenShell);
    }
    for &p in occ_window.iter().chain(virtuals.iter()) {
        if p >= h.n_orbitals {
            return Err(OrbitalError::OutOfRange(p, h.n_orbitals));
        }
    }
    for &p in occ_window {
        if virtuals.contains(&p) {
            return Err(OrbitalError::WindowOverlap(p));
        }
    }
    let fock = fock_matrix(h);
    let eps: Vec<f64> = (0..h.n_orbitals).map(|p| fock[p * h.n_orbitals + p]).collect();

    let no = 2 * occ_window.len();
    let nv = 2 * virtuals.len();
    let mut t = vec![0.0; no * no * nv * nv];
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for b in 0..nv {
                    let num = anti_so(h, occ_window, virtuals, i, j, a, b);
                    if num == 0.0 {
                        continue;
                    }
                    let den = eps[occ_window[i / 2]] + eps[occ_window[j / 2]]
                        - eps[virtuals[a / 2]]
                        - eps[virtuals[b / 2]];
                    if den.abs() < 1e-10 {
                        return Err(OrbitalError::DegenerateDenominator(den));
                    }
                    t[((i * no + j) * nv + a) * nv + b] = num / den;
                }
            }
        }
    }
    Ok(Mp2Amplitudes {
        occ_window: occ_window.to_vec(),
        virtuals: virtuals.to_vec(),
        eps,
        t,
        n_occ_so: no,
        n_virt_so: nv,
    })
}

/// MP2 correlation energy `E2 = ¼ Σ_ijab ⟨ij||ab⟩ t_ij^ab` (non-positive for
/// a gapped reference).
pub fn mp2_energy(h: &FermionHamiltonian, t: &Mp2Amplitudes) -> f64 {
    let mut e = 0.0;
    for i in 0..t.n_occ_so {
        for j in 0..t.n_occ_so {
            for a in 0..t.n_virt_so {
                for b in 0..t.n_virt_so {
                    e += anti_so(h, &t.occ_window, &t.virtuals, i, j, a, b)
                        * t.t_elem(i, j, a, b);
                }
            }
        }
    }
    0.25 * e
}

/// Which contraction defines the virtual correlation density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FnoForm {
    /// `d_ab = Σ_cij t_ij^ac t_ij^cb` — the default in this crate.
    #[default]
    MatrixSquare,
    /// `d_ab = Σ_cij t_ij^ac t_ij^bc` — the conventional density, kept for
    /// comparison runs.
    Conventional,
}

/// Natural-virtual selection data: the (spatial) virtual correlation density,
/// its spectrum sorted by absolute value, and the orthogonal rotation whose
/// column `r` is the rank-`r` natural virtual in the canonical virtual basis.
#[derive(Debug, Clone)]
pub struct FnoSelection {
    pub d: SymMatrix,
    pub eigenvalues: Vec<f64>,
    pub rotation: Vec<Vec<f64>>,
    pub selected: Vec<usize>,
}

/// Contract the amplitudes into the virtual correlation density and
/// diagonalize it. The spin blocks of the density coincide for a restricted
/// reference; the alpha block is returned as the spatial density.
pub fn fno_density(t: &Mp2Amplitudes) -> FnoSelection {
    fno_density_with(t, FnoForm::MatrixSquare)
}

pub fn fno_density_with(t: &Mp2Amplitudes, form: FnoForm) -> FnoSelection {
    let nv = t.virtuals.len();
    let mut d = SymMatrix::zeros(nv);
    for ap in 0..nv {
        for bp in 0..nv {
            let a = 2 * ap; // alpha spin block
            let b = 2 * bp;
            let mut v = 0.0;
            for c in 0..t.n_virt_so {
                for i in 0..t.n_occ_so {
                    for j in 0..t.n_occ_so {
                        v += match form {
                            FnoForm::MatrixSquare => t.t_elem(i, j, a, c) * t.t_elem(i, j, c, b),
                            FnoForm::Conventional => t.t_elem(i, j, a, c) * t.t_elem(i, j, b, c),
                        };
                    }
                }
            }
            d.data[ap * nv + bp] = v;
        }
    }
    // enforce exact symmetry before diagonalizing
    for ap in 0..nv {
        for bp in (ap + 1)..nv {
            let avg = 0.5 * (d.get(ap, bp) + d.get(bp, ap));
            d.set(ap, bp, avg);
        }
    }

    let eig = symmetric_eigen(&d);
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by(|&x, &y| {
        eig.values[y].abs().partial_cmp(&eig.values[x].abs()).unwrap().then(x.cmp(&y))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();
    let rotation: Vec<Vec<f64>> =
        (0..nv).map(|row| order.iter().map(|&k| eig.vectors[k][row]).collect()).collect();
    FnoSelection { d, eigenvalues, rotation, selected: (0..nv).collect() }
}

/// Keep the `count` natural virtuals with the largest absolute eigenvalues.
pub fn select_fno_virtuals(
    sel: &FnoSelection,
    count: usize,
) -> Result<FnoSelection, OrbitalError> {
    let nv = sel.eigenvalues.len();
    if count > nv {
        return Err(OrbitalError::TooManyVirtuals { requested: count, available: nv });
    }
    let mut out = sel.clone();
    out.selected = (0..count).collect();
    Ok(out)
}

/// Expand the virtual-space rotation to a full orbital rotation: identity on
/// the `n_occ` lowest orbitals, natural virtuals (by rank) above them.
pub fn full_orbital_rotation(n_orb: usize, n_occ: usize, sel: &FnoSelection) -> Vec<Vec<f64>> {
    let nv = n_orb - n_occ;
    assert_eq!(sel.rotation.len(), nv, "virtual rotation dimension mismatch");
    let mut u = vec![vec![0.0; n_orb]; n_orb];
    for i in 0..n_occ {
        u[i][i] = 1.0;
    }
    for row in 0..nv {
        for col in 0..nv {
            u[n_occ + row][n_occ + col] = sel.rotation[row][col];
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::parse_fcidump;

    fn identity_mo() -> MoCoefficients {
        let mut map = BTreeMap::new();
        map.insert("0".to_string(), vec![0]);
        map.insert("1".to_string(), vec![1]);
        MoCoefficients {
            n_ao: 2,
            n_mo: 2,
            occupied_count: 2,
            coefficients: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            atom_ao_map: map,
        }
    }

    #[test]
    fn identity_coefficients_weights() {
        let mo = identity_mo();
        let w = assignment_weights(&mo, &[0]).unwrap();
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn weights_are_sign_invariant() {
        let mut mo = identity_mo();
        for row in &mut mo.coefficients {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        let w = assignment_weights(&mo, &[0]).unwrap();
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn empty_fragment_is_an_error() {
        let mo = identity_mo();
        assert!(matches!(assignment_weights(&mo, &[]), Err(OrbitalError::EmptyFragment)));
    }

    #[test]
    fn fragment_count_identity() {
        let mo = identity_mo();
        assert_eq!(fragment_orbital_count(&mo, &[0]).unwrap(), 1);
        assert_eq!(fragment_orbital_count(&mo, &[0, 1]).unwrap(), 2);
    }

    #[test]
    fn split_weight_assigned_to_dominant_atom() {
        // one orbital with 0.6/0.4 weight split across two atoms
        let mut map = BTreeMap::new();
        map.insert("0".to_string(), vec![0]);
        map.insert("1".to_string(), vec![1]);
        let mo = MoCoefficients {
            n_ao: 2,
            n_mo: 1,
            occupied_count: 1,
            coefficients: vec![vec![0.6], vec![-0.4]],
            atom_ao_map: map,
        };
        assert_eq!(orbital_home_atoms(&mo), vec![0]);
        assert_eq!(fragment_orbital_count(&mo, &[0]).unwrap(), 1);
        assert_eq!(fragment_orbital_count(&mo, &[1]).unwrap(), 0);
    }

    #[test]
    fn selection_order_and_ties() {
        assert_eq!(select_fragment_orbitals(&[3.0, 1.0, 2.0], 2).unwrap(), vec![0, 2]);
        assert_eq!(select_fragment_orbitals(&[1.0, 1.0], 1).unwrap(), vec![0]);
        assert_eq!(select_fragment_orbitals(&[1.0, 2.0], 0).unwrap(), Vec::<usize>::new());
        assert!(select_fragment_orbitals(&[1.0], 2).is_err());
    }

    fn h2_like() -> FermionHamiltonian {
        parse_fcidump(
            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 0.6744 1 1 1 1\n 0.6634 2 2 2 2\n 0.6973 2 2 1 1\n 0.1813 2 1 2 1\n -1.2524 1 1 0 0\n -0.4759 2 2 0 0\n 0.7137 0 0 0 0\n",
        )
        .unwrap()
    }

    #[test]
    fn zero_integrals_give_zero_amplitudes() {
        let text = "&FCI NORB=3,NELEC=2,MS2=0,\n&END\n -2.0 1 1 0 0\n -1.0 2 2 0 0\n 0.5 3 3 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let t = mp2_amplitudes(&h, &[0], &[1, 2]).unwrap();
        assert_eq!(t.max_abs(), 0.0);
        let sel = fno_density(&t);
        assert!(sel.eigenvalues.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn h2_amplitude_matches_hand_evaluation() {
        let h = h2_like();
        let t = mp2_amplitudes(&h, &[0], &[1]).unwrap();
        let fock = fock_matrix(&h);
        let (e0, e1) = (fock[0], fock[3]);
        // opposite-spin channel: ⟨0α 0β||1α 1β⟩ = (01|01)
        let want = h.g_elem(0, 1, 0, 1) / (2.0 * e0 - 2.0 * e1);
        let got = t.t_elem(0, 1, 0, 1);
        assert!((got - want).abs() < 1e-14, "got {got}, want {want}");
        // same-spin channel vanishes with a single occupied orbital
        assert_eq!(t.t_elem(0, 0, 0, 0), 0.0);
        assert!(mp2_energy(&h, &t) <= 0.0);
    }

    #[test]
    fn amplitude_permutation_symmetry() {
        let h = h2_like();
        let t = mp2_amplitudes(&h, &[0], &[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert!((t.t_elem(i, j, a, b) - t.t_elem(j, i, b, a)).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn overlapping_window_rejected() {
        let h = h2_like();
        assert!(matches!(
            mp2_amplitudes(&h, &[0], &[0, 1]),
            Err(OrbitalError::WindowOverlap(0))
        ));
    }

    #[test]
    fn density_matches_direct_contraction() {
        let h = h2_like();
        let t = mp2_amplitudes(&h, &[0], &[1]).unwrap();
        let sel = fno_density(&t);
        let mut want = 0.0;
        for c in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    want += t.t_elem(i, j, 0, c) * t.t_elem(i, j, c, 0);
                }
            }
        }
        assert!((sel.d.get(0, 0) - want).abs() < 1e-15);
        // the matrix-square contraction can produce negative diagonals on
        // cross-spin blocks; magnitude is what matters for selection
        assert!(want.abs() > 0.0);
    }

    #[test]
    fn fno_selection_bounds_and_order() {
        let h = h2_like();
        let t = mp2_amplitudes(&h, &[0], &[1]).unwrap();
        let sel = fno_density(&t);
        assert_eq!(sel.eigenvalues.len(), 1);
        let kept = select_fno_virtuals(&sel, 1).unwrap();
        assert_eq!(kept.selected, vec![0]);
        let none = select_fno_virtuals(&sel, 0).unwrap();
        assert!(none.selected.is_empty());
        assert!(select_fno_virtuals(&sel, 2).is_err());
    }

    #[test]
    fn rotation_is_orthogonal_and_spectrum_sorted() {
        let text = "&FCI NORB=4,NELEC=2,MS2=0,\n&END\n 1.0 1 1 1 1\n 0.9 2 2 2 2\n 0.85 3 3 3 3\n 0.8 4 4 4 4\n 0.5 2 2 1 1\n 0.45 3 3 1 1\n 0.42 4 4 1 1\n 0.11 2 1 2 1\n 0.09 3 1 3 1\n 0.07 4 1 4 1\n 0.05 3 2 4 1\n -2.0 1 1 0 0\n -0.3 2 2 0 0\n -0.1 3 3 0 0\n 0.1 4 4 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let t = mp2_amplitudes(&h, &[0], &[1, 2, 3]).unwrap();
        let sel = fno_density(&t);
        let r = &sel.rotation;
        let nv = 3;
        for i in 0..nv {
            for j in 0..nv {
                let dot: f64 = (0..nv).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
        for k in 1..sel.eigenvalues.len() {
            assert!(sel.eigenvalues[k - 1].abs() >= sel.eigenvalues[k].abs() - 1e-15);
        }
    }
}

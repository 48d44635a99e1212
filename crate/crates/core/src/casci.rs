//! Exact classical references.
//!
//! Two independent routes to the ground energy of an active space: dense
//! diagonalization in the fixed-particle determinant basis (via the
//! Slater-Condon rules) and diagonalization of the Jordan-Wigner matrix
//! restricted to the same particle/spin sector (via Pauli action on basis
//! states). The two paths share no matrix-element code, so their agreement
//! validates both.

use crate::hamiltonian::FermionHamiltonian;
use crate::linalg::{lowest_eigenpair, SymMatrix};
use crate::pauli::PauliSum;
use crate::slater::{slater_condon_element, DeterminantBasis, SlaterError};
use thiserror::Error;

/// Determinant-space dimension cap; CAS(6,6) is 400.
pub const MAX_CI_DIMENSION: usize = 1_000_000;
/// Width cap for the dense Jordan-Wigner route.
pub const MAX_JW_DENSE_QUBITS: usize = 14;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("determinant basis dimension {0} exceeds cap {MAX_CI_DIMENSION}")]
    DimensionCap(usize),
    #[error("{0} qubits exceed the dense Jordan-Wigner cap of {MAX_JW_DENSE_QUBITS}")]
    WidthCap(usize),
    #[error("empty particle sector")]
    EmptySector,
    #[error(transparent)]
    Slater(#[from] SlaterError),
}

/// Ground state from exact diagonalization in the determinant basis.
///
/// Returns the energy and the ground vector (coefficients in the order of
/// [`DeterminantBasis::determinants`]).
pub fn casci_ground(h: &FermionHamiltonian) -> Result<(f64, Vec<f64>), OracleError> {
    let basis = DeterminantBasis::new(h.n_orbitals, h.n_alpha, h.n_beta);
    let dim = basis.dimension();
    if dim > MAX_CI_DIMENSION {
        return Err(OracleError::DimensionCap(dim));
    }
    if dim == 0 {
        return Err(OracleError::EmptySector);
    }
    let mut m = SymMatrix::zeros(dim);
    for (i, &di) in basis.determinants.iter().enumerate() {
        for (j, &dj) in basis.determinants.iter().enumerate().skip(i) {
            let v = slater_condon_element(h, di, dj)?;
            m.set(i, j, v);
        }
    }
    let (e0, v0) = lowest_eigenpair(&m);
    Ok((e0, v0))
}

/// Lowest eigenvalue of the qubit Hamiltonian within the `(n_alpha, n_beta)`
/// particle/spin sector.
///
/// The full `2^n × 2^n` matrix is built column-by-column through the Pauli
/// action on sector basis states, which is its exact restriction to the
/// sector (the Hamiltonian conserves both spin counts).
pub fn jw_dense_ground(
    h: &PauliSum,
    n_alpha: usize,
    n_beta: usize,
) -> Result<f64, OracleError> {
    if h.n > MAX_JW_DENSE_QUBITS {
        return Err(OracleError::WidthCap(h.n));
    }
    assert!(h.n % 2 == 0, "spin-orbital qubit count must be even");
    let n_orb = h.n / 2;
    let basis = DeterminantBasis::new(n_orb, n_alpha, n_beta);
    let dim = basis.dimension();
    if dim == 0 {
        return Err(OracleError::EmptySector);
    }
    let mut index_of = std::collections::HashMap::with_capacity(dim);
    for (i, &d) in basis.determinants.iter().enumerate() {
        index_of.insert(d, i);
    }
    let mut m = SymMatrix::zeros(dim);
    for (col, &d) in basis.determinants.iter().enumerate() {
        for term in h.terms() {
            let (out, phase) = term.apply_to_basis(d);
            if let Some(&row) = index_of.get(&out) {
                // Hermitian with real coefficients: entries are real
                m.data[row * dim + col] += phase.re;
            }
        }
    }
    // symmetrize away accumulation noise
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, avg);
        }
    }
    Ok(lowest_eigenpair(&m).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::parse_fcidump;
    use crate::jw::jordan_wigner;
    use crate::pauli::{PauliString, PauliSum};
    use num_complex::Complex64;

    #[test]
    fn single_orbital_closed_form() {
        // 1 orbital, 2 electrons: E0 = e_core + 2 h00 + (00|00)
        let text = "&FCI NORB=1,NELEC=2,MS2=0,\n&END\n 0.7 1 1 1 1\n -1.0 1 1 0 0\n 0.5 0 0 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let (e0, v0) = casci_ground(&h).unwrap();
        assert!((e0 - (0.5 - 2.0 + 0.7)).abs() < 1e-14);
        assert_eq!(v0.len(), 1);
    }

    #[test]
    fn diagonal_h_fills_lowest_orbitals() {
        let text = "&FCI NORB=3,NELEC=2,MS2=0,\n&END\n -2.0 1 1 0 0\n -1.0 2 2 0 0\n 3.0 3 3 0 0\n 0.25 0 0 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let (e0, _) = casci_ground(&h).unwrap();
        assert!((e0 - (0.25 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn jw_identity_sum_gives_its_coefficient() {
        let sum = PauliSum::from_terms(
            2,
            vec![PauliString::identity(2, Complex64::new(-3.25, 0.0))],
        )
        .unwrap();
        let e = jw_dense_ground(&sum, 1, 0).unwrap();
        assert!((e - (-3.25)).abs() < 1e-14);
    }

    #[test]
    fn jw_single_z_term_extremes() {
        // Z on qubit 0 over (1 alpha in 1 spatial orbital of a 2-qubit system):
        // the (1,0) sector contains only |01⟩→ Z_0 eigenvalue −1
        let z0 = PauliSum::from_terms(
            2,
            vec![PauliString::from_letters("ZI", Complex64::new(0.75, 0.0)).unwrap()],
        )
        .unwrap();
        let e = jw_dense_ground(&z0, 1, 0).unwrap();
        assert!((e - (-0.75)).abs() < 1e-14);
        // in the (0,1) sector the alpha qubit is empty → eigenvalue +1
        let e = jw_dense_ground(&z0, 0, 1).unwrap();
        assert!((e - 0.75).abs() < 1e-14);
    }

    #[test]
    fn jw_two_electron_sector_closed_form() {
        // 1 spatial orbital with (00|00) = u: the dense Jordan-Wigner ground
        // energy in the 2-electron sector is e_core + 2·h00 + u
        let text = "&FCI NORB=1,NELEC=2,MS2=0,\n&END\n 0.7 1 1 1 1\n -1.0 1 1 0 0\n 0.5 0 0 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let e = jw_dense_ground(&jordan_wigner(&h), 1, 1).unwrap();
        assert!((e - (0.5 - 2.0 + 0.7)).abs() < 1e-12);
    }

    #[test]
    fn two_paths_agree_on_a_small_hamiltonian() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 0.6744 1 1 1 1\n 0.6634 2 2 2 2\n 0.6973 2 2 1 1\n 0.1813 2 1 2 1\n -1.2524 1 1 0 0\n -0.4759 2 2 0 0\n 0.7137 0 0 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let (e_det, _) = casci_ground(&h).unwrap();
        let e_jw = jw_dense_ground(&jordan_wigner(&h), h.n_alpha, h.n_beta).unwrap();
        assert!((e_det - e_jw).abs() < 1e-9, "det {e_det} vs jw {e_jw}");
    }

    #[test]
    fn width_cap_enforced() {
        let sum = PauliSum::zero(16);
        assert!(matches!(jw_dense_ground(&sum, 1, 1), Err(OracleError::WidthCap(_))));
    }
}

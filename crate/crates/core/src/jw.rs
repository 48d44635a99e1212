//! Jordan-Wigner mapping of fermionic operators to Pauli sums.
//!
//! Spin orbitals are blocked — all alpha first, then all beta — so that
//! excitation-operator indices line up with the qubit layout used by the
//! ansatz builders. Ladder operators pick up the usual Z-parity strings:
//! `a†_p ↦ Z_0…Z_{p−1} ⊗ (X_p − iY_p)/2` and
//! `a_p ↦ Z_0…Z_{p−1} ⊗ (X_p + iY_p)/2`.

use crate::hamiltonian::FermionHamiltonian;
use crate::pauli::{Pauli, PauliError, PauliString, PauliSum};
use num_complex::Complex64;

/// Creation or annihilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Map a single ladder operator on spin orbital `p` to a two-term Pauli sum
/// over `n` qubits.
pub fn jw_ladder(p: usize, kind: LadderKind, n: usize) -> Result<PauliSum, PauliError> {
    if p >= n {
        return Err(PauliError::QubitOutOfRange { index: p, n });
    }
    let mut x_ops: Vec<(usize, Pauli)> = (0..p).map(|q| (q, Pauli::Z)).collect();
    let mut y_ops = x_ops.clone();
    x_ops.push((p, Pauli::X));
    y_ops.push((p, Pauli::Y));
    let y_coeff = match kind {
        LadderKind::Create => Complex64::new(0.0, -0.5),
        LadderKind::Annihilate => Complex64::new(0.0, 0.5),
    };
    let x_term = PauliString::from_ops(n, Complex64::new(0.5, 0.0), &x_ops)?;
    let y_term = PauliString::from_ops(n, y_coeff, &y_ops)?;
    PauliSum::from_terms(n, vec![x_term, y_term])
}

/// Total-number operator `Σ_p (I − Z_p)/2`.
pub fn number_operator(n: usize) -> PauliSum {
    let mut terms = vec![PauliString::identity(n, Complex64::new(n as f64 / 2.0, 0.0))];
    for q in 0..n {
        terms.push(
            PauliString::from_ops(n, Complex64::new(-0.5, 0.0), &[(q, Pauli::Z)]).unwrap(),
        );
    }
    PauliSum::from_terms(n, terms).unwrap()
}

/// Qubit index of spatial orbital `p` with spin `sigma` (0 = alpha, 1 = beta)
/// in the blocked layout.
#[inline]
pub fn spin_orbital_index(p: usize, sigma: usize, n_orb: usize) -> usize {
    p + sigma * n_orb
}

/// Map a full second-quantized Hamiltonian to a Pauli sum.
///
/// `H = e_core + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`,
/// with the chemists'-notation tensor converted at mapping time. Coefficients
/// of the merged result are real for a Hermitian input.
pub fn jordan_wigner(h: &FermionHamiltonian) -> PauliSum {
    let n_orb = h.n_orbitals;
    let n = 2 * n_orb;
    let mut total = PauliSum::from_terms(
        n,
        vec![PauliString::identity(n, Complex64::new(h.e_core, 0.0))],
    )
    .unwrap();

    // cache ladder sums per (index, kind)
    let creators: Vec<PauliSum> =
        (0..n).map(|q| jw_ladder(q, LadderKind::Create, n).unwrap()).collect();
    let annihilators: Vec<PauliSum> =
        (0..n).map(|q| jw_ladder(q, LadderKind::Annihilate, n).unwrap()).collect();

    for p in 0..n_orb {
        for q in 0..n_orb {
            let hpq = h.h_elem(p, q);
            if hpq.abs() < 1e-15 {
                continue;
            }
            for sigma in 0..2 {
                let pi = spin_orbital_index(p, sigma, n_orb);
                let qi = spin_orbital_index(q, sigma, n_orb);
                let term = creators[pi].product(&annihilators[qi]).unwrap();
                total = total.add(&term.scale(Complex64::new(hpq, 0.0))).unwrap();
            }
        }
    }

    for p in 0..n_orb {
        for q in 0..n_orb {
            for r in 0..n_orb {
                for s in 0..n_orb {
                    let v = h.g_elem(p, q, r, s);
                    if v.abs() < 1e-15 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let pi = spin_orbital_index(p, sigma, n_orb);
                            let qi = spin_orbital_index(q, sigma, n_orb);
                            let ri = spin_orbital_index(r, tau, n_orb);
                            let si = spin_orbital_index(s, tau, n_orb);
                            // a†_p a†_r a_s a_q
                            let op = creators[pi]
                                .product(&creators[ri])
                                .unwrap()
                                .product(&annihilators[si])
                                .unwrap()
                                .product(&annihilators[qi])
                                .unwrap();
                            total = total.add(&op.scale(Complex64::new(0.5 * v, 0.0))).unwrap();
                        }
                    }
                }
            }
        }
    }

    total
}

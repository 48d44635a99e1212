//! Shared helpers for integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qcas_core::circuit::Circuit;
use qcas_core::hamiltonian::{parse_fcidump, FermionHamiltonian};
use qcas_core::pauli::{Pauli, PauliString, PauliSum};
use qcas_core::simulator::StateVector;
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn load_fcidump(name: &str) -> FermionHamiltonian {
    parse_fcidump(&fixture_text(name)).expect("fixture parses")
}

/// Column `b` is `U|b⟩`.
pub fn dense_unitary(c: &Circuit) -> Vec<Vec<Complex64>> {
    let dim = 1usize << c.n_qubits;
    (0..dim)
        .map(|b| {
            let mut sv = StateVector::basis_state(c.n_qubits, b as u64).unwrap();
            sv.apply(c).unwrap();
            sv.amps
        })
        .collect()
}

/// Global-phase-insensitive equivalence: `|tr(U†V)| / 2^n`.
pub fn phase_free_fidelity(u: &[Vec<Complex64>], v: &[Vec<Complex64>]) -> f64 {
    let dim = u.len();
    let mut trace = Complex64::new(0.0, 0.0);
    for b in 0..dim {
        for i in 0..dim {
            trace += u[b][i].conj() * v[b][i];
        }
    }
    trace.norm() / dim as f64
}

pub fn max_deviation_from_identity(u: &[Vec<Complex64>]) -> f64 {
    let dim = u.len();
    // strip the global phase using the largest diagonal entry
    let phase = (0..dim)
        .map(|b| u[b][b])
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap();
    let phase = phase / phase.norm();
    let mut worst = 0.0f64;
    for b in 0..dim {
        for i in 0..dim {
            let want = if i == b { phase } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((u[b][i] - want).norm());
        }
    }
    worst
}

/// `Q† = (X − iY)/2` on one wire.
pub fn q_plus(n: usize, w: usize) -> PauliSum {
    PauliSum::from_terms(
        n,
        vec![
            PauliString::from_ops(n, Complex64::new(0.5, 0.0), &[(w, Pauli::X)]).unwrap(),
            PauliString::from_ops(n, Complex64::new(0.0, -0.5), &[(w, Pauli::Y)]).unwrap(),
        ],
    )
    .unwrap()
}

/// `Q = (X + iY)/2` on one wire.
pub fn q_minus(n: usize, w: usize) -> PauliSum {
    PauliSum::from_terms(
        n,
        vec![
            PauliString::from_ops(n, Complex64::new(0.5, 0.0), &[(w, Pauli::X)]).unwrap(),
            PauliString::from_ops(n, Complex64::new(0.0, 0.5), &[(w, Pauli::Y)]).unwrap(),
        ],
    )
    .unwrap()
}

pub fn apply_sum_to_amps(sum: &PauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for t in sum.terms() {
        for (b, &amp) in v.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (b2, ph) = t.apply_to_basis(b as u64);
            out[b2 as usize] += ph * amp;
        }
    }
    out
}

/// `exp(θG)|v⟩ = |v⟩ + sinθ·G|v⟩ + (1−cosθ)·G²|v⟩`, valid for `G³ = −G`
/// (a rotation generator on an invariant two-level subspace).
pub fn expm_rotation_generator(g: &PauliSum, theta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let gv = apply_sum_to_amps(g, v);
    let ggv = apply_sum_to_amps(g, &gv);
    let mut out = v.to_vec();
    for i in 0..v.len() {
        out[i] += theta.sin() * gv[i] + (1.0 - theta.cos()) * ggv[i];
    }
    out
}

/// Deterministic pseudo-random generator for test fixtures.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    pub fn next_usize(&mut self, m: usize) -> usize {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 33) as usize) % m
    }

    pub fn random_state(&mut self, n: usize) -> StateVector {
        let mut amps: Vec<Complex64> =
            (0..1usize << n).map(|_| Complex64::new(self.next_f64(), self.next_f64())).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector { n, amps }
    }
}

/// Random valid Hamiltonian: symmetric one-body matrix plus a separable
/// (hence 8-fold symmetric) two-body tensor.
pub fn random_hamiltonian(
    rng: &mut TestRng,
    n: usize,
    n_alpha: usize,
    n_beta: usize,
    two_body_scale: f64,
) -> FermionHamiltonian {
    use qcas_core::hamiltonian::TwoBody;
    let mut h = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..=p {
            let v = if p == q { -1.5 + 0.4 * p as f64 + 0.2 * rng.next_f64() } else { 0.1 * rng.next_f64() };
            h[p * n + q] = v;
            h[q * n + p] = v;
        }
    }
    let mut g = TwoBody::zeros(n);
    // sum of rank-1 symmetric charge distributions; writing only canonical
    // entries keeps all 8 permutations bitwise identical
    let mut clouds: Vec<Vec<f64>> = vec![];
    for _ in 0..n {
        clouds.push((0..n).map(|_| rng.next_f64()).collect());
    }
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    let mut v = 0.0;
                    for u in &clouds {
                        v += u[p] * u[q] * u[r] * u[s];
                    }
                    g.set_symmetric(p, q, r, s, two_body_scale * v);
                }
            }
        }
    }
    FermionHamiltonian::new(0.3 * rng.next_f64(), h, g, n, n_alpha, n_beta).unwrap()
}

//! Cross-module oracles: every energy has at least two independent routes.

mod common;

use common::*;
use qcas_core::casci::{casci_ground, jw_dense_ground};
use qcas_core::hamiltonian::{
    oniom_total, parse_fcidump, serialize_fcidump, wf_in_dft_energy, ActiveSpaceSpec, EnergyLedger,
};
use qcas_core::jw::jordan_wigner;
use qcas_core::linalg::{symmetric_eigen, SymMatrix};
use qcas_core::orbitals::{
    assignment_weights, fno_density, full_orbital_rotation, mp2_amplitudes, MoCoefficients,
};
use qcas_core::simulator::StateVector;
use qcas_core::slater::{
    determinant_from_occupations, reference_determinant, slater_condon_element, DeterminantBasis,
};

#[test]
fn fixture_round_trips_identically() {
    let h = load_fcidump("cas66.fcidump");
    let back = parse_fcidump(&serialize_fcidump(&h)).unwrap();
    assert_eq!(h, back);
    for p in 0..h.n_orbitals {
        for q in 0..h.n_orbitals {
            assert!((h.h_elem(p, q) - back.h_elem(p, q)).abs() < 1e-14);
        }
    }
}

#[test]
fn hf_energy_matches_statevector_expectation() {
    // ⟨HF|H_qubit|HF⟩ through the Jordan-Wigner map and the simulator
    let h = load_fcidump("cas66.fcidump");
    let hf = h.reference_energy();
    let qh = jordan_wigner(&h);
    let reference = reference_determinant(h.n_orbitals, h.n_alpha, h.n_beta);
    let sv = StateVector::basis_state(qh.n, reference).unwrap();
    let e = sv.expectation(&qh).unwrap();
    assert!((e - hf).abs() < 1e-9, "{e} vs {hf}");
}

#[test]
fn casci_and_dense_jw_agree_on_fixtures() {
    for name in ["h4.fcidump", "cas66.fcidump"] {
        let h = load_fcidump(name);
        let (e_det, _) = casci_ground(&h).unwrap();
        let e_jw = jw_dense_ground(&jordan_wigner(&h), h.n_alpha, h.n_beta).unwrap();
        assert!((e_det - e_jw).abs() < 1e-9, "{name}: {e_det} vs {e_jw}");
    }
}

#[test]
fn casci_and_dense_jw_agree_on_random_hamiltonians() {
    let mut rng = TestRng(0xfeed5eed);
    for case in 0..8 {
        let n = 2 + case % 3; // 2..4 orbitals
        let h = random_hamiltonian(&mut rng, n, 1 + case % 2, 1, 0.2);
        let (e_det, _) = casci_ground(&h).unwrap();
        let e_jw = jw_dense_ground(&jordan_wigner(&h), h.n_alpha, h.n_beta).unwrap();
        assert!((e_det - e_jw).abs() < 1e-9, "case {case}: {e_det} vs {e_jw}");
    }
}

#[test]
fn slater_condon_matches_dense_jw_matrix_elements() {
    let mut rng = TestRng(0xabcdef12345);
    let h = random_hamiltonian(&mut rng, 4, 2, 2, 0.3);
    let qh = jordan_wigner(&h);
    let basis = DeterminantBasis::new(4, 2, 2);
    for (i, &di) in basis.determinants.iter().enumerate() {
        for &dj in basis.determinants.iter().skip(i) {
            let sc = slater_condon_element(&h, di, dj).unwrap();
            // ⟨di|H|dj⟩ from the Pauli action on a basis ket
            let mut jw_elem = num_complex::Complex64::new(0.0, 0.0);
            for term in qh.terms() {
                let (out, phase) = term.apply_to_basis(dj);
                if out == di {
                    jw_elem += phase;
                }
            }
            assert!(
                (sc - jw_elem.re).abs() < 1e-10 && jw_elem.im.abs() < 1e-12,
                "di={di:b} dj={dj:b}: {sc} vs {jw_elem}"
            );
        }
    }
}

#[test]
fn folded_core_reproduces_constrained_ci() {
    // freeze orbital 0 of the 4-orbital fixture; the folded CASCI(2e,3o)
    // must equal full-space CI restricted to determinants with orbital 0
    // doubly occupied (enumerated by brute force)
    let h = load_fcidump("h4.fcidump");
    let spec = ActiveSpaceSpec { frozen_core: vec![0], active: vec![1, 2, 3], n_active_electrons: 2 };
    let folded = h.fold_core(&spec).unwrap();
    let (e_folded, _) = casci_ground(&folded).unwrap();

    let constrained: Vec<u64> = DeterminantBasis::new(4, 2, 2)
        .determinants
        .into_iter()
        .filter(|d| {
            let alpha0 = d & 1 != 0;
            let beta0 = d & (1 << 4) != 0;
            alpha0 && beta0
        })
        .collect();
    let dim = constrained.len();
    let mut m = SymMatrix::zeros(dim);
    for (i, &di) in constrained.iter().enumerate() {
        for (j, &dj) in constrained.iter().enumerate().skip(i) {
            m.set(i, j, slater_condon_element(&h, di, dj).unwrap());
        }
    }
    let e_constrained = symmetric_eigen(&m).values[0];
    assert!(
        (e_folded - e_constrained).abs() < 1e-10,
        "{e_folded} vs {e_constrained}"
    );
}

#[test]
fn casci_is_invariant_under_random_orbital_rotations() {
    let h = load_fcidump("h4.fcidump");
    let (e0, _) = casci_ground(&h).unwrap();
    let mut rng = TestRng(0x5ca1ab1e);
    for _ in 0..3 {
        // random orthogonal via eigenvectors of a random symmetric matrix
        let n = h.n_orbitals;
        let mut s = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                s.set(i, j, rng.next_f64());
            }
        }
        let eig = symmetric_eigen(&s);
        let u: Vec<Vec<f64>> =
            (0..n).map(|row| (0..n).map(|col| eig.vectors[col][row]).collect()).collect();
        let rotated = h.rotate_orbitals(&u).unwrap();
        let (e1, _) = casci_ground(&rotated).unwrap();
        assert!((e0 - e1).abs() < 1e-8, "{e0} vs {e1}");
    }
}

#[test]
fn full_rank_fno_rotation_preserves_casci() {
    let h = load_fcidump("cas66.fcidump");
    let (e0, _) = casci_ground(&h).unwrap();
    let n_occ = h.n_alpha;
    let virtuals: Vec<usize> = (n_occ..h.n_orbitals).collect();
    let window: Vec<usize> = (0..n_occ).collect();
    let t = mp2_amplitudes(&h, &window, &virtuals).unwrap();
    let sel = fno_density(&t);
    let u = full_orbital_rotation(h.n_orbitals, n_occ, &sel);
    let rotated = h.rotate_orbitals(&u).unwrap();
    let (e1, _) = casci_ground(&rotated).unwrap();
    assert!((e0 - e1).abs() < 1e-9, "{e0} vs {e1}");
    // the rotated Hamiltonian leaves the reference energy intact too
    // (occupied block untouched)
    assert!((h.reference_energy() - rotated.reference_energy()).abs() < 1e-10);
}

#[test]
fn assignment_weights_match_naive_loop_oracle() {
    let mo = MoCoefficients::from_json(&fixture_text("mo10.json")).unwrap();
    let fragment = vec![0, 2];
    let weights = assignment_weights(&mo, &fragment).unwrap();
    // independent loop order: over AOs first, orbitals inside
    let mut want = vec![0.0; mo.occupied_count];
    let fragment_aos: Vec<usize> = vec![0, 1, 2, 5, 6, 7];
    for &mu in &fragment_aos {
        for (i, w) in want.iter_mut().enumerate() {
            *w += mo.coefficients[mu][i].abs();
        }
    }
    for (a, b) in weights.iter().zip(&want) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn fno_density_matches_naive_contraction_oracle() {
    // randomized 3-virtual fixtures against a four-nested-loop contraction
    let mut rng = TestRng(0x00c0ffee);
    for case in 0..4 {
        let h = random_hamiltonian(&mut rng, 5, 2, 2, 0.15 + 0.05 * case as f64);
        let t = mp2_amplitudes(&h, &[0, 1], &[2, 3, 4]).unwrap();
        let sel = fno_density(&t);
        let nv = 3;
        for ap in 0..nv {
            for bp in 0..nv {
                let mut want = 0.0;
                for c in 0..t.n_virt_so() {
                    for i in 0..t.n_occ_so() {
                        for j in 0..t.n_occ_so() {
                            want += t.t_elem(i, j, 2 * ap, c) * t.t_elem(i, j, c, 2 * bp);
                        }
                    }
                }
                assert!(
                    (sel.d.get(ap, bp) - want).abs() < 1e-13,
                    "case {case} d[{ap}][{bp}]"
                );
            }
        }
    }
}

#[test]
fn ledger_fixture_composition_matches_hand_arithmetic() {
    let ledger = EnergyLedger::from_json(&fixture_text("ledger.json")).unwrap();
    let qm = wf_in_dft_energy(&ledger).unwrap();
    // -152.125 + (-310.5) - (-150.0)
    assert!((qm - (-312.625)).abs() < 1e-12);
    let total = oniom_total(&ledger).unwrap();
    // -1234.5 - (-210.25) + (-312.625)
    assert!((total - (-1336.875)).abs() < 1e-12);
}

#[test]
fn sampled_patterns_conserve_particle_number() {
    // qubit-excitation circuits conserve Hamming weight, so every sampled
    // pattern carries exactly n_electrons set bits
    use qcas_core::solver::{build_pool, AnsatzState};
    let h = load_fcidump("h4.fcidump");
    let reference = reference_determinant(h.n_orbitals, h.n_alpha, h.n_beta);
    let pool = build_pool(reference, 8);
    let ops: Vec<_> =
        pool.operators.iter().take(6).map(|&op| (op, 0.2)).collect();
    let ansatz = AnsatzState { ops, energy: 0.0 };
    let mut sv = StateVector::zero_state(8).unwrap();
    sv.apply(&ansatz.circuit(8, reference).unwrap()).unwrap();
    let samples = sv.sample(4096, 99).unwrap();
    for &pattern in samples.counts.keys() {
        assert_eq!(pattern.count_ones() as usize, h.n_electrons());
    }
}

#[test]
fn determinant_occupation_helpers_agree() {
    let d = determinant_from_occupations(&[0, 2], &[1], 4);
    assert_eq!(d, 0b0010_0101 & 0xFF);
    assert_eq!(reference_determinant(4, 2, 1), determinant_from_occupations(&[0, 1], &[0], 4));
}

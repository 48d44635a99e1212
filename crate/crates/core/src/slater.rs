//! Slater determinants and Slater-Condon matrix elements.
//!
//! A determinant is a bitmask over spin orbitals in the blocked layout used
//! throughout the crate: bits `0..n_orbitals` are alpha spatial orbitals,
//! bits `n_orbitals..2·n_orbitals` are beta. Bit `q` set means spin orbital
//! `q` occupied, and `|mask⟩ = a†_{q1}…a†_{qk}|vac⟩` with `q1 < … < qk`,
//! which is exactly the computational-basis convention of the Jordan-Wigner
//! map. Matrix elements between determinants differing by more than two spin
//! orbitals vanish.

use crate::hamiltonian::FermionHamiltonian;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SlaterError {
    #[error("determinants live in different particle/spin sectors ({0:#x} vs {1:#x})")]
    SectorMismatch(u64, u64),
    #[error("determinant uses spin orbital {0}, but only {1} exist")]
    OutOfRange(usize, usize),
}

/// Occupied spin orbitals of `mask`, ascending.
pub fn occupied_list(mask: u64) -> Vec<usize> {
    let mut v = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let q = m.trailing_zeros() as usize;
        v.push(q);
        m &= m - 1;
    }
    v
}

/// Compose a determinant mask from per-spin spatial occupations.
pub fn determinant_from_occupations(occ_alpha: &[usize], occ_beta: &[usize], n_orb: usize) -> u64 {
    let mut mask = 0u64;
    for &p in occ_alpha {
        mask |= 1u64 << p;
    }
    for &p in occ_beta {
        mask |= 1u64 << (n_orb + p);
    }
    mask
}

/// Reference determinant: lowest orbitals filled per spin.
pub fn reference_determinant(n_orb: usize, n_alpha: usize, n_beta: usize) -> u64 {
    let alpha = if n_alpha == 0 { 0 } else { (1u64 << n_alpha) - 1 };
    let beta = if n_beta == 0 { 0 } else { ((1u64 << n_beta) - 1) << n_orb };
    alpha | beta
}

#[inline]
fn bits_below(p: usize) -> u64 {
    (1u64 << p) - 1
}

/// `a_p |mask⟩`: returns the new mask and the Jordan-Wigner parity sign,
/// or `None` when the orbital is empty.
#[inline]
pub fn annihilate(mask: u64, p: usize) -> Option<(u64, f64)> {
    if mask & (1u64 << p) == 0 {
        return None;
    }
    let sign = if (mask & bits_below(p)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((mask & !(1u64 << p), sign))
}

/// `a†_p |mask⟩`: returns the new mask and parity sign, or `None` when the
/// orbital is already occupied.
#[inline]
pub fn create(mask: u64, p: usize) -> Option<(u64, f64)> {
    if mask & (1u64 << p) != 0 {
        return None;
    }
    let sign = if (mask & bits_below(p)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((mask | (1u64 << p), sign))
}

#[inline]
fn spatial_and_spin(q: usize, n_orb: usize) -> (usize, usize) {
    if q < n_orb {
        (q, 0)
    } else {
        (q - n_orb, 1)
    }
}

/// Antisymmetrized two-electron integral over spin orbitals,
/// `⟨ij||kl⟩ = ⟨ij|kl⟩ − ⟨ij|lk⟩` with `⟨ij|kl⟩ = (ik|jl)·δσ(i,k)·δσ(j,l)`.
fn anti(h: &FermionHamiltonian, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let n = h.n_orbitals;
    let (pi, si) = spatial_and_spin(i, n);
    let (pj, sj) = spatial_and_spin(j, n);
    let (pk, sk) = spatial_and_spin(k, n);
    let (pl, sl) = spatial_and_spin(l, n);
    let mut v = 0.0;
    if si == sk && sj == sl {
        v += h.g_elem(pi, pk, pj, pl);
    }
    if si == sl && sj == sk {
        v -= h.g_elem(pi, pl, pj, pk);
    }
    v
}

fn one_body(h: &FermionHamiltonian, i: usize, j: usize) -> f64 {
    let n = h.n_orbitals;
    let (pi, si) = spatial_and_spin(i, n);
    let (pj, sj) = spatial_and_spin(j, n);
    if si == sj {
        h.h_elem(pi, pj)
    } else {
        0.0
    }
}

fn excitation_sign(mask: u64, hole: usize, particle: usize) -> f64 {
    let (lo, hi) = if hole < particle { (hole, particle) } else { (particle, hole) };
    let between = bits_below(hi) & !bits_below(lo + 1);
    if (mask & between).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨D1|H|D2⟩` by the Slater-Condon rules.
pub fn slater_condon_element(
    h: &FermionHamiltonian,
    d1: u64,
    d2: u64,
) -> Result<f64, SlaterError> {
    let n = h.n_orbitals;
    let n_so = 2 * n;
    let all = if n_so == 64 { u64::MAX } else { (1u64 << n_so) - 1 };
    for d in [d1, d2] {
        if d & !all != 0 {
            return Err(SlaterError::OutOfRange(63 - (d & !all).leading_zeros() as usize, n_so));
        }
    }
    let alpha_mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    if (d1 & alpha_mask).count_ones() != (d2 & alpha_mask).count_ones()
        || (d1 >> n).count_ones() != (d2 >> n).count_ones()
    {
        return Err(SlaterError::SectorMismatch(d1, d2));
    }

    let diff = d1 ^ d2;
    let degree = diff.count_ones() / 2;
    match degree {
        0 => {
            let occ = occupied_list(d1);
            let mut e = h.e_core;
            for &i in &occ {
                e += one_body(h, i, i);
            }
            for &i in &occ {
                for &j in &occ {
                    e += 0.5 * anti(h, i, j, i, j);
                }
            }
            Ok(e)
        }
        1 => {
            let hole = (diff & d1).trailing_zeros() as usize;
            let particle = (diff & d2).trailing_zeros() as usize;
            let mut v = one_body(h, hole, particle);
            let mut occ = d1 & !(1u64 << hole);
            while occ != 0 {
                let j = occ.trailing_zeros() as usize;
                occ &= occ - 1;
                v += anti(h, hole, j, particle, j);
            }
            Ok(excitation_sign(d1, hole, particle) * v)
        }
        2 => {
            let holes = occupied_list(diff & d1);
            let particles = occupied_list(diff & d2);
            let (i, j) = (holes[0], holes[1]);
            let (a, b) = (particles[0], particles[1]);
            // sign from applying i→a then j→b on the updated mask
            let s1 = excitation_sign(d1, i, a);
            let interim = (d1 & !(1u64 << i)) | (1u64 << a);
            let s2 = excitation_sign(interim, j, b);
            Ok(s1 * s2 * anti(h, i, j, a, b))
        }
        _ => Ok(0.0),
    }
}

/// Complete determinant basis for fixed per-spin particle counts, enumerated
/// in ascending `(beta_mask, alpha_mask)` order.
#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub determinants: Vec<u64>,
}

fn masks_with_popcount(n_bits: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    if k > n_bits {
        return vec![];
    }
    let mut out = vec![];
    let limit = 1u64 << n_bits;
    // Gosper's hack: next integer with the same popcount
    let mut v = (1u64 << k) - 1;
    while v < limit {
        out.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

impl DeterminantBasis {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Self {
        let alphas = masks_with_popcount(n_orb, n_alpha);
        let betas = masks_with_popcount(n_orb, n_beta);
        let mut determinants = Vec::with_capacity(alphas.len() * betas.len());
        for &b in &betas {
            for &a in &alphas {
                determinants.push(a | (b << n_orb));
            }
        }
        DeterminantBasis { n_orb, n_alpha, n_beta, determinants }
    }

    pub fn dimension(&self) -> usize {
        self.determinants.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::parse_fcidump;

    fn h2_like() -> FermionHamiltonian {
        parse_fcidump(
            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 0.6744 1 1 1 1\n 0.6634 2 2 2 2\n 0.6973 2 2 1 1\n 0.1813 2 1 2 1\n -1.2524 1 1 0 0\n -0.4759 2 2 0 0\n 0.7137 0 0 0 0\n",
        )
        .unwrap()
    }

    #[test]
    fn diagonal_element_matches_hf_energy() {
        let h = h2_like();
        let d = reference_determinant(2, 1, 1);
        let e = slater_condon_element(&h, d, d).unwrap();
        let hf = h.hf_energy(&[0], &[0]).unwrap();
        assert!((e - hf).abs() < 1e-14);
    }

    #[test]
    fn sector_mismatch_is_an_error() {
        let h = h2_like();
        let d1 = determinant_from_occupations(&[0], &[0], 2);
        let d2 = determinant_from_occupations(&[0, 1], &[], 2);
        assert!(matches!(
            slater_condon_element(&h, d1, d2),
            Err(SlaterError::SectorMismatch(..))
        ));
    }

    #[test]
    fn triple_excitations_vanish() {
        let text = "&FCI NORB=4,NELEC=6,MS2=0,\n&END\n -1.0 1 1 0 0\n 0.3 1 2 1 3\n 0.2 1 1 1 1\n";
        let h = parse_fcidump(text).unwrap();
        // two alpha excitations plus one beta excitation: degree 3
        let d1 = determinant_from_occupations(&[0, 1], &[0], 4);
        let d2 = determinant_from_occupations(&[2, 3], &[1], 4);
        let e = slater_condon_element(&h, d1, d2).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn ladder_operators_track_parity() {
        // a_1 on |{0,1}⟩ crosses one occupied orbital below it
        let (m, s) = annihilate(0b11, 1).unwrap();
        assert_eq!(m, 0b01);
        assert_eq!(s, -1.0);
        let (m, s) = annihilate(0b11, 0).unwrap();
        assert_eq!(m, 0b10);
        assert_eq!(s, 1.0);
        assert!(annihilate(0b10, 0).is_none());
        let (m, s) = create(0b01, 2).unwrap();
        assert_eq!(m, 0b101);
        assert_eq!(s, -1.0);
        assert!(create(0b01, 0).is_none());
    }

    #[test]
    fn basis_enumeration_dimension() {
        let basis = DeterminantBasis::new(6, 3, 3);
        assert_eq!(basis.dimension(), 400); // C(6,3)^2
        let basis = DeterminantBasis::new(4, 2, 2);
        assert_eq!(basis.dimension(), 36);
        // all determinants distinct and in the right sector
        for &d in &basis.determinants {
            assert_eq!((d & 0xF).count_ones(), 2);
            assert_eq!((d >> 4).count_ones(), 2);
        }
    }
}

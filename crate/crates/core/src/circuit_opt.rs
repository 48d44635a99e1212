//! Gate reduction: slice-and-resynthesize CNOT runs plus one-qubit
//! simplification.
//!
//! CNOT-only circuit segments compute invertible linear Boolean functions;
//! each maximal segment is resynthesized — provably minimal via
//! bidirectional breadth-first search over GL(n,2) when the segment touches
//! at most five qubits, structured Gaussian elimination otherwise — and the
//! original segment is kept whenever resynthesis is not shorter. One-qubit
//! runs are simplified by rotation merging, involution cancellation, and
//! `H·RZ(φ)·H ↔ RX(φ)` rewrites, with an Euler-angle compression capping
//! any surviving run at three rotations. Every transformation preserves the
//! circuit unitary up to global phase.

use crate::circuit::{Circuit, Gate};
use num_complex::Complex64;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("segment contains a non-CNOT gate: {0}")]
    NotCnotOnly(String),
    #[error("matrix is singular; no CNOT circuit realizes it")]
    Singular,
    #[error("optimal synthesis capped at 5 qubits, got {0}")]
    WidthCap(usize),
}

/// Bit matrix over GF(2); row `i` is a u64 bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    pub n: usize,
    pub rows: Vec<u64>,
}

impl Gf2Matrix {
    pub fn identity(n: usize) -> Self {
        Gf2Matrix { n, rows: (0..n).map(|i| 1u64 << i).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r == 1u64 << i)
    }

    /// Row-update semantics of appending `CNOT(c → t)`.
    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        self.rows[t] ^= self.rows[c];
    }

    pub fn is_invertible(&self) -> bool {
        let mut rows = self.rows.clone();
        for col in 0..self.n {
            let bit = 1u64 << col;
            let pivot = (col..self.n).find(|&r| rows[r] & bit != 0);
            let Some(pivot) = pivot else { return false };
            rows.swap(col, pivot);
            for r in 0..self.n {
                if r != col && rows[r] & bit != 0 {
                    rows[r] ^= rows[col];
                }
            }
        }
        true
    }

    /// Pack into a single u64 (valid for n ≤ 8).
    fn key(&self) -> u64 {
        let mut k = 0u64;
        for (i, &r) in self.rows.iter().enumerate() {
            k |= r << (i * self.n);
        }
        k
    }

    fn from_key(key: u64, n: usize) -> Self {
        let mask = (1u64 << n) - 1;
        Gf2Matrix { n, rows: (0..n).map(|i| (key >> (i * n)) & mask).collect() }
    }
}

/// The linear function computed by a CNOT-only gate slice.
pub fn linear_function_of(gates: &[Gate], n: usize) -> Result<Gf2Matrix, OptError> {
    let mut m = Gf2Matrix::identity(n);
    for g in gates {
        match *g {
            Gate::Cnot(c, t) => m.apply_cnot(c, t),
            other => return Err(OptError::NotCnotOnly(other.to_string())),
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Slicing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceKind {
    CnotRun,
    Other,
}

/// A partition of a (possibly commuted) circuit into CNOT-only runs and
/// everything else.
#[derive(Debug, Clone)]
pub struct SlicePlan {
    /// Equivalent circuit after safe disjoint-support commutations.
    pub circuit: Circuit,
    /// `(start, end, kind)` spans; `start..end` index into `circuit.gates`.
    pub spans: Vec<(usize, usize, SliceKind)>,
}

/// Identify maximal CNOT-only spans, first commuting one-qubit gates leftward
/// past CNOTs with disjoint qubit support so adjacent runs merge.
pub fn slice_cnot_runs(c: &Circuit) -> SlicePlan {
    let mut gates = c.gates.clone();
    for idx in 1..gates.len() {
        if gates[idx].is_two_qubit() {
            continue;
        }
        let mut i = idx;
        while i > 0 && gates[i - 1].is_two_qubit() && gates[i].disjoint_from(&gates[i - 1]) {
            gates.swap(i - 1, i);
            i -= 1;
        }
    }

    let mut spans = vec![];
    let mut start = 0usize;
    while start < gates.len() {
        let is_cnot = gates[start].is_two_qubit();
        let mut end = start + 1;
        while end < gates.len() && gates[end].is_two_qubit() == is_cnot {
            end += 1;
        }
        spans.push((start, end, if is_cnot { SliceKind::CnotRun } else { SliceKind::Other }));
        start = end;
    }
    SlicePlan { circuit: Circuit { n_qubits: c.n_qubits, gates }, spans }
}

// ---------------------------------------------------------------------------
// CNOT synthesis
// ---------------------------------------------------------------------------

/// Provably CNOT-minimal realization of an invertible matrix, by
/// bidirectional breadth-first search over GL(n,2). Capped at n ≤ 5.
pub fn synthesize_optimal(m: &Gf2Matrix) -> Result<Vec<(usize, usize)>, OptError> {
    let n = m.n;
    if n > 5 {
        return Err(OptError::WidthCap(n));
    }
    if !m.is_invertible() {
        return Err(OptError::Singular);
    }
    let identity = Gf2Matrix::identity(n);
    let target_key = m.key();
    let id_key = identity.key();
    if target_key == id_key {
        return Ok(vec![]);
    }

    let moves: Vec<(usize, usize)> = (0..n)
        .flat_map(|c| (0..n).filter(move |&t| t != c).map(move |t| (c, t)))
        .collect();

    // parent maps: key → (previous key, move index applied to reach it)
    let mut fwd: HashMap<u64, (u64, usize)> = HashMap::new();
    let mut bwd: HashMap<u64, (u64, usize)> = HashMap::new();
    fwd.insert(id_key, (id_key, usize::MAX));
    bwd.insert(target_key, (target_key, usize::MAX));
    let mut f_frontier = vec![id_key];
    let mut b_frontier = vec![target_key];

    fn expand(
        frontier: &[u64],
        visited: &mut HashMap<u64, (u64, usize)>,
        moves: &[(usize, usize)],
        n: usize,
    ) -> Vec<u64> {
        let mut next = vec![];
        for &key in frontier {
            let mat = Gf2Matrix::from_key(key, n);
            for (mi, &(c, t)) in moves.iter().enumerate() {
                let mut m2 = mat.clone();
                m2.apply_cnot(c, t);
                let k2 = m2.key();
                if let std::collections::hash_map::Entry::Vacant(slot) = visited.entry(k2) {
                    slot.insert((key, mi));
                    next.push(k2);
                }
            }
        }
        next
    }

    loop {
        // expand the smaller frontier one full level
        let expand_fwd = f_frontier.len() <= b_frontier.len();
        if expand_fwd {
            f_frontier = expand(&f_frontier, &mut fwd, &moves, n);
        } else {
            b_frontier = expand(&b_frontier, &mut bwd, &moves, n);
        }
        let (scan, other) = if expand_fwd { (&f_frontier, &bwd) } else { (&b_frontier, &fwd) };
        if let Some(&meet) = scan.iter().find(|k| other.contains_key(k)) {
            // forward chain: identity → meet
            let mut fwd_moves = vec![];
            let mut cur = meet;
            while cur != id_key {
                let (prev, mi) = fwd[&cur];
                fwd_moves.push(moves[mi]);
                cur = prev;
            }
            fwd_moves.reverse();
            // backward chain: appending each recorded move walks meet → target
            let mut cur = meet;
            let mut gates = fwd_moves;
            while cur != target_key {
                let (toward_target, mi) = bwd[&cur];
                gates.push(moves[mi]);
                cur = toward_target;
            }
            return Ok(gates);
        }
        assert!(
            !f_frontier.is_empty() || !b_frontier.is_empty(),
            "search space exhausted without meeting"
        );
    }
}

/// Structured Gaussian elimination synthesis; valid for any invertible
/// matrix, with CNOT count at most n².
pub fn synthesize_gaussian(m: &Gf2Matrix) -> Result<Vec<(usize, usize)>, OptError> {
    let n = m.n;
    let mut work = m.rows.clone();
    // reduction ops (c, t): row_t ^= row_c
    let mut ops: Vec<(usize, usize)> = vec![];
    let op = |work: &mut Vec<u64>, ops: &mut Vec<(usize, usize)>, c: usize, t: usize| {
        work[t] ^= work[c];
        ops.push((c, t));
    };
    for col in 0..n {
        let bit = 1u64 << col;
        if work[col] & bit == 0 {
            let Some(src) = ((col + 1)..n).find(|&r| work[r] & bit != 0) else {
                return Err(OptError::Singular);
            };
            op(&mut work, &mut ops, src, col);
        }
        for row in (col + 1)..n {
            if work[row] & bit != 0 {
                op(&mut work, &mut ops, col, row);
            }
        }
    }
    for col in (0..n).rev() {
        let bit = 1u64 << col;
        for row in 0..col {
            if work[row] & bit != 0 {
                op(&mut work, &mut ops, col, row);
            }
        }
    }
    debug_assert!(Gf2Matrix { n, rows: work }.is_identity());
    // the reduction maps M to I, so the circuit is the reversed op list
    ops.reverse();
    Ok(ops)
}

// ---------------------------------------------------------------------------
// One-qubit simplification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Axis {
    X,
    Y,
    Z,
}

fn gate_axis(g: &Gate) -> Option<(Axis, f64)> {
    match *g {
        Gate::Rx(_, a) => Some((Axis::X, a)),
        Gate::Ry(_, a) => Some((Axis::Y, a)),
        Gate::Rz(_, a) => Some((Axis::Z, a)),
        Gate::P(_, a) => Some((Axis::Z, a)),
        Gate::X(_) => Some((Axis::X, std::f64::consts::PI)),
        _ => None,
    }
}

fn angle_is_trivial(a: f64) -> bool {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = a.rem_euclid(two_pi);
    r < 1e-12 || (two_pi - r) < 1e-12
}

/// 2×2 unitary of a one-qubit gate.
fn gate_matrix(g: &Gate) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    match *g {
        Gate::X(_) => [[z, Complex64::new(1.0, 0.0)], [Complex64::new(1.0, 0.0), z]],
        Gate::H(_) => {
            let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[s, s], [s, -s]]
        }
        Gate::Rx(_, t) => {
            let c = Complex64::new((t / 2.0).cos(), 0.0);
            let s = Complex64::new(0.0, -(t / 2.0).sin());
            [[c, s], [s, c]]
        }
        Gate::Ry(_, t) => {
            let c = Complex64::new((t / 2.0).cos(), 0.0);
            let s = Complex64::new((t / 2.0).sin(), 0.0);
            [[c, -s], [s, c]]
        }
        Gate::Rz(_, t) => [
            [Complex64::from_polar(1.0, -t / 2.0), z],
            [z, Complex64::from_polar(1.0, t / 2.0)],
        ],
        Gate::P(_, t) => [[Complex64::new(1.0, 0.0), z], [z, Complex64::from_polar(1.0, t)]],
        Gate::Cnot(..) => unreachable!("one-qubit runs never contain CNOTs"),
    }
}

fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// ZYZ Euler angles, up to global phase: `U ≅ RZ(γ)·RY(β)·RZ(α)` with `α`
/// applied first. Matrix form:
/// `[[cos(β/2)·e^{−i(α+γ)/2}, −sin(β/2)·e^{i(α−γ)/2}],`
/// ` [sin(β/2)·e^{i(γ−α)/2},   cos(β/2)·e^{i(α+γ)/2}]]`.
fn euler_zyz(u: [[Complex64; 2]; 2]) -> (f64, f64, f64) {
    let beta = 2.0 * u[1][0].norm().atan2(u[0][0].norm());
    if u[0][0].norm() <= 1e-9 {
        // β ≈ π: only α−γ matters; fix γ = 0, then (−u01)/u10 = e^{iα}
        let alpha = (-u[0][1] / u[1][0]).arg();
        (alpha, beta, 0.0)
    } else if u[1][0].norm() <= 1e-9 {
        // β ≈ 0: only α+γ matters; fix γ = 0, then u11/u00 = e^{iα}
        let alpha = (u[1][1] / u[0][0]).arg();
        (alpha, beta, 0.0)
    } else {
        // u10/u00 = tan(β/2)·e^{iγ}, u11/u00 = e^{i(α+γ)}
        let gamma = (u[1][0] / u[0][0]).arg();
        let sum = (u[1][1] / u[0][0]).arg();
        (sum - gamma, beta, gamma)
    }
}

/// Simplify a single run of one-qubit gates on qubit `q`.
fn simplify_run(run: &[Gate], q: usize) -> Vec<Gate> {
    let mut gates: Vec<Gate> = run.to_vec();
    loop {
        let mut changed = false;
        // drop null rotations (X is an involution, not a null rotation)
        let before = gates.len();
        gates.retain(|g| match gate_axis(g) {
            Some((_, a)) => matches!(g, Gate::X(_)) || !angle_is_trivial(a),
            None => true,
        });
        changed |= gates.len() != before;

        let mut out: Vec<Gate> = vec![];
        let mut i = 0;
        while i < gates.len() {
            let g = gates[i];
            if i + 1 < gates.len() {
                let h = gates[i + 1];
                // H·H → ∅, X·X → ∅
                if matches!((g, h), (Gate::H(_), Gate::H(_)) | (Gate::X(_), Gate::X(_))) {
                    i += 2;
                    changed = true;
                    continue;
                }
                // same-axis rotation merging; X participates as RX(π) and the
                // Z family (RZ, P) merges up to global phase
                if let (Some((a1, t1)), Some((a2, t2))) = (gate_axis(&g), gate_axis(&h)) {
                    let mergeable = matches!(
                        (a1, a2),
                        (Axis::X, Axis::X) | (Axis::Y, Axis::Y) | (Axis::Z, Axis::Z)
                    );
                    if mergeable {
                        let total = t1 + t2;
                        let merged = match (a1, g, h) {
                            (Axis::Z, Gate::P(..), Gate::P(..)) => Gate::P(q, total),
                            (Axis::Z, _, _) => Gate::Rz(q, total),
                            (Axis::Y, _, _) => Gate::Ry(q, total),
                            (Axis::X, _, _) => Gate::Rx(q, total),
                        };
                        out.push(merged);
                        i += 2;
                        changed = true;
                        continue;
                    }
                }
                // H · RZ(φ) · H → RX(φ) and H · RX(φ) · H → RZ(φ)
                if i + 2 < gates.len() {
                    if let (Gate::H(_), mid, Gate::H(_)) = (g, gates[i + 1], gates[i + 2]) {
                        match mid {
                            Gate::Rz(_, t) => {
                                out.push(Gate::Rx(q, t));
                                i += 3;
                                changed = true;
                                continue;
                            }
                            Gate::Rx(_, t) => {
                                out.push(Gate::Rz(q, t));
                                i += 3;
                                changed = true;
                                continue;
                            }
                            _ => {}
                        }
                    }
                }
            }
            out.push(g);
            i += 1;
        }
        gates = out;
        if !changed {
            break;
        }
    }

    // a run that is still long collapses to its Euler form (≤ 3 rotations)
    if gates.len() > 3 {
        let mut u = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        for g in &gates {
            u = mat_mul(gate_matrix(g), u);
        }
        let (alpha, beta, gamma) = euler_zyz(u);
        let mut euler = vec![];
        if !angle_is_trivial(alpha) {
            euler.push(Gate::Rz(q, alpha));
        }
        if !angle_is_trivial(beta) {
            euler.push(Gate::Ry(q, beta));
        }
        if !angle_is_trivial(gamma) {
            euler.push(Gate::Rz(q, gamma));
        }
        if euler.len() < gates.len() {
            gates = euler;
        }
    }
    gates
}

/// Simplify all one-qubit runs (maximal sequences of one-qubit gates on a
/// qubit uninterrupted by a CNOT touching it). The unitary is preserved up
/// to global phase.
pub fn simplify_one_qubit(c: &Circuit) -> Circuit {
    let n = c.n_qubits;
    let mut segment = vec![0usize; n];
    let mut runs: HashMap<(usize, usize), Vec<Gate>> = HashMap::new();
    // run key per gate; CNOTs advance the segment counters of both qubits
    let mut placement: Vec<(usize, usize)> = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        match g.qubits() {
            (q, None) => {
                let key = (q, segment[q]);
                runs.entry(key).or_default().push(*g);
                placement.push(key);
            }
            (a, Some(b)) => {
                segment[a] += 1;
                segment[b] += 1;
                placement.push((usize::MAX, usize::MAX));
            }
        }
    }

    let simplified: HashMap<(usize, usize), Vec<Gate>> =
        runs.iter().map(|(&k, r)| (k, simplify_run(r, k.0))).collect();

    let mut out = Circuit::new(n);
    let mut emitted: HashMap<(usize, usize), bool> = HashMap::new();
    for (g, &key) in c.gates.iter().zip(&placement) {
        if key.0 == usize::MAX {
            out.push(*g).expect("gate already validated");
            continue;
        }
        if !*emitted.get(&key).unwrap_or(&false) {
            emitted.insert(key, true);
            for sg in &simplified[&key] {
                out.push(*sg).expect("gate already validated");
            }
        }
    }
    out
}

/// Rewrite non-rotation one-qubit gates into RZ/RX rotations, the way a
/// hardware-targeted compilation pass does before optimization:
/// `H → RZ(π/2)·RX(π/2)·RZ(π/2)` (up to global phase) and `X → RX(π)`.
/// Rotations and CNOTs pass through unchanged.
pub fn rebase_rotations(c: &Circuit) -> Circuit {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut out = Circuit::new(c.n_qubits);
    for g in &c.gates {
        match *g {
            Gate::H(q) => {
                out.push(Gate::Rz(q, FRAC_PI_2)).expect("validated");
                out.push(Gate::Rx(q, FRAC_PI_2)).expect("validated");
                out.push(Gate::Rz(q, FRAC_PI_2)).expect("validated");
            }
            Gate::X(q) => out.push(Gate::Rx(q, PI)).expect("validated"),
            other => out.push(other).expect("validated"),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateCounts {
    pub g1: usize,
    pub g2: usize,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OptimizeReport {
    pub before: GateCounts,
    pub after: GateCounts,
    pub budget_1q: usize,
    pub budget_met: bool,
}

/// Resynthesize the CNOT runs of a sliced circuit on their qubit support;
/// runs whose resynthesis is not shorter are kept as-is.
fn resynthesize_runs(plan: &SlicePlan) -> Circuit {
    let n = plan.circuit.n_qubits;
    let mut out = Circuit::new(n);
    for &(start, end, kind) in &plan.spans {
        let gates = &plan.circuit.gates[start..end];
        if kind == SliceKind::Other {
            for g in gates {
                out.push(*g).expect("validated");
            }
            continue;
        }
        let mut support: Vec<usize> = vec![];
        for g in gates {
            let (a, b) = g.qubits();
            for q in [a, b.expect("cnot")] {
                if !support.contains(&q) {
                    support.push(q);
                }
            }
        }
        support.sort_unstable();
        let local_of: HashMap<usize, usize> =
            support.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let local_gates: Vec<Gate> = gates
            .iter()
            .map(|g| match *g {
                Gate::Cnot(c, t) => Gate::Cnot(local_of[&c], local_of[&t]),
                _ => unreachable!("cnot run"),
            })
            .collect();
        let m = linear_function_of(&local_gates, support.len()).expect("cnot-only run");
        let synth = if support.len() <= 5 {
            synthesize_optimal(&m).expect("invertible by construction")
        } else {
            synthesize_gaussian(&m).expect("invertible by construction")
        };
        if synth.len() < gates.len() {
            for (c, t) in synth {
                out.push(Gate::Cnot(support[c], support[t])).expect("validated");
            }
        } else {
            for g in gates {
                out.push(*g).expect("validated");
            }
        }
    }
    out
}

/// simplify → slice → per-run resynthesis → simplify. Missing the one-qubit
/// budget is reported, never an error.
pub fn optimize(c: &Circuit, budget_1q: usize) -> (Circuit, OptimizeReport) {
    let (b1, b2) = c.gate_counts();
    let stage1 = simplify_one_qubit(c);
    let plan = slice_cnot_runs(&stage1);
    let stage2 = resynthesize_runs(&plan);
    let result = simplify_one_qubit(&stage2);
    let (a1, a2) = result.gate_counts();
    let report = OptimizeReport {
        before: GateCounts { g1: b1, g2: b2 },
        after: GateCounts { g1: a1, g2: a2 },
        budget_1q,
        budget_met: a1 <= budget_1q,
    };
    (result, report)
}

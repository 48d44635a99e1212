//! Gate-level circuit IR and the qubit-excitation circuit builders.
//!
//! The singles and doubles builders emit fixed gate sequences (8 one-qubit
//! gates + 2 CNOTs, and 23 + 13 respectively). Both realize one-parameter
//! rotations confined to a two-level excitation subspace and reduce to the
//! identity at θ = 0; the dense-unitary tests pin the exact relation between
//! the builder parameter and the rotation angle.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("gate qubits must be distinct, got {0}")]
    RepeatedQubit(usize),
    #[error("qubit {index} out of range for circuit of width {n}")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Gate kinds; rotations carry an angle in radians, `P(φ) = diag(1, e^{iφ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    P(usize, f64),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _)
            | Gate::P(q, _) => (q, None),
            Gate::Cnot(c, t) => (c, Some(t)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot(..))
    }

    pub fn max_qubit(&self) -> usize {
        match self.qubits() {
            (a, Some(b)) => a.max(b),
            (a, None) => a,
        }
    }

    /// True when the two gates act on disjoint qubit sets.
    pub fn disjoint_from(&self, other: &Gate) -> bool {
        let (a0, a1) = self.qubits();
        let (b0, b1) = other.qubits();
        let mut overlap = a0 == b0;
        if let Some(b1) = b1 {
            overlap |= a0 == b1;
        }
        if let Some(a1) = a1 {
            overlap |= a1 == b0;
            if let Some(b1) = b1 {
                overlap |= a1 == b1;
            }
        }
        !overlap
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::X(q) => write!(f, "x {q}"),
            Gate::H(q) => write!(f, "h {q}"),
            Gate::Rx(q, a) => write!(f, "rx {q} {a}"),
            Gate::Ry(q, a) => write!(f, "ry {q} {a}"),
            Gate::Rz(q, a) => write!(f, "rz {q} {a}"),
            Gate::P(q, a) => write!(f, "p {q} {a}"),
            Gate::Cnot(c, t) => write!(f, "cnot {c} {t}"),
        }
    }
}

/// Ordered gate list over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: vec![] }
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if let Gate::Cnot(c, t) = gate {
            if c == t {
                return Err(CircuitError::RepeatedQubit(c));
            }
        }
        if gate.max_qubit() >= self.n_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: gate.max_qubit(),
                n: self.n_qubits,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        for &g in &other.gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Exact tallies by arity: `(one_qubit, two_qubit)`.
    pub fn gate_counts(&self) -> (usize, usize) {
        let two = self.gates.iter().filter(|g| g.is_two_qubit()).count();
        (self.gates.len() - two, two)
    }

    /// Line serialization: optional `qubits N` header, then one lowercase
    /// `gate q0 [q1] [param]` per line.
    pub fn to_lines(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            out.push_str(&format!("{g}\n"));
        }
        out
    }

    pub fn from_lines(text: &str) -> Result<Circuit, CircuitError> {
        let mut n_qubits: Option<usize> = None;
        let mut gates: Vec<Gate> = vec![];
        let mut max_q = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_q = |s: &str| -> Result<usize, CircuitError> {
                s.parse().map_err(|_| CircuitError::Parse {
                    line: lineno + 1,
                    message: format!("bad qubit index '{s}'"),
                })
            };
            let parse_angle = |s: &str| -> Result<f64, CircuitError> {
                s.parse().map_err(|_| CircuitError::Parse {
                    line: lineno + 1,
                    message: format!("bad angle '{s}'"),
                })
            };
            let expect = |want: usize| -> Result<(), CircuitError> {
                if fields.len() != want + 1 {
                    Err(CircuitError::Parse {
                        line: lineno + 1,
                        message: format!(
                            "'{}' takes {} argument(s), found {}",
                            fields[0],
                            want,
                            fields.len() - 1
                        ),
                    })
                } else {
                    Ok(())
                }
            };
            let gate = match fields[0] {
                "qubits" => {
                    expect(1)?;
                    n_qubits = Some(parse_q(fields[1])?);
                    continue;
                }
                "x" => {
                    expect(1)?;
                    Gate::X(parse_q(fields[1])?)
                }
                "h" => {
                    expect(1)?;
                    Gate::H(parse_q(fields[1])?)
                }
                "rx" => {
                    expect(2)?;
                    Gate::Rx(parse_q(fields[1])?, parse_angle(fields[2])?)
                }
                "ry" => {
                    expect(2)?;
                    Gate::Ry(parse_q(fields[1])?, parse_angle(fields[2])?)
                }
                "rz" => {
                    expect(2)?;
                    Gate::Rz(parse_q(fields[1])?, parse_angle(fields[2])?)
                }
                "p" => {
                    expect(2)?;
                    Gate::P(parse_q(fields[1])?, parse_angle(fields[2])?)
                }
                "cnot" => {
                    expect(2)?;
                    Gate::Cnot(parse_q(fields[1])?, parse_q(fields[2])?)
                }
                other => {
                    return Err(CircuitError::Parse {
                        line: lineno + 1,
                        message: format!("unknown gate '{other}'"),
                    })
                }
            };
            max_q = max_q.max(gate.max_qubit());
            gates.push(gate);
        }
        let n = n_qubits.unwrap_or(if gates.is_empty() { 0 } else { max_q + 1 });
        let mut c = Circuit::new(n);
        for g in gates {
            c.push(g).map_err(|e| CircuitError::Parse { line: 0, message: e.to_string() })?;
        }
        Ok(c)
    }
}

// ---------------------------------------------------------------------------
// Excitation operators and their circuits
// ---------------------------------------------------------------------------

/// A one- or two-body particle-hole excitation between spin-orbital qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExcitationOp {
    /// occupied `i` → virtual `a`
    Single { i: usize, a: usize },
    /// occupied pair `(i, j)` → virtual pair `(a, b)`, stored with `i<j`, `a<b`
    Double { i: usize, j: usize, a: usize, b: usize },
}

impl ExcitationOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            ExcitationOp::Single { i, a } => vec![i, a],
            ExcitationOp::Double { i, j, a, b } => vec![i, j, a, b],
        }
    }

    pub fn max_qubit(&self) -> usize {
        *self.qubits().iter().max().unwrap()
    }

    pub fn circuit(&self, n_qubits: usize, theta: f64) -> Result<Circuit, CircuitError> {
        match *self {
            ExcitationOp::Single { i, a } => {
                // the builder's first wire is the created (virtual) qubit
                let mut c = Circuit::new(n_qubits);
                append_single_excitation(&mut c, a, i, theta)?;
                Ok(c)
            }
            ExcitationOp::Double { i, j, a, b } => {
                let mut c = Circuit::new(n_qubits);
                append_double_excitation(&mut c, i, j, a, b, theta)?;
                Ok(c)
            }
        }
    }
}

impl fmt::Display for ExcitationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ExcitationOp::Single { i, a } => write!(f, "s {i}->{a}"),
            ExcitationOp::Double { i, j, a, b } => write!(f, "d {i},{j}->{a},{b}"),
        }
    }
}

/// Parametrized single-excitation circuit on wires `(i, j)`:
/// 8 one-qubit gates and 2 CNOTs realizing
/// `exp(θ(Q†_i Q_j − Q†_j Q_i))` — wire `i` is the created side.
pub fn build_single_excitation(
    n_qubits: usize,
    i: usize,
    j: usize,
    theta: f64,
) -> Result<Circuit, CircuitError> {
    let mut c = Circuit::new(n_qubits);
    append_single_excitation(&mut c, i, j, theta)?;
    Ok(c)
}

fn append_single_excitation(
    c: &mut Circuit,
    i: usize,
    j: usize,
    theta: f64,
) -> Result<(), CircuitError> {
    use std::f64::consts::FRAC_PI_2;
    if i == j {
        return Err(CircuitError::RepeatedQubit(i));
    }
    c.push(Gate::Rz(i, -FRAC_PI_2))?;
    c.push(Gate::Rx(i, FRAC_PI_2))?;
    c.push(Gate::Rx(j, FRAC_PI_2))?;
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Rx(i, theta))?;
    c.push(Gate::Rz(j, theta))?;
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Rx(i, -FRAC_PI_2))?;
    c.push(Gate::Rx(j, -FRAC_PI_2))?;
    c.push(Gate::Rz(i, FRAC_PI_2))?;
    Ok(())
}

/// Parametrized double-excitation circuit on wires `(i, j, k, l)`:
/// 23 one-qubit gates and 13 CNOTs. The rotation couples `|1100⟩` and
/// `|0011⟩` on the four wires (occupied pair on `i, j`, virtual pair on
/// `k, l`) and leaves every other four-qubit pattern invariant.
pub fn build_double_excitation(
    n_qubits: usize,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    theta: f64,
) -> Result<Circuit, CircuitError> {
    let mut c = Circuit::new(n_qubits);
    append_double_excitation(&mut c, i, j, k, l, theta)?;
    Ok(c)
}

fn append_double_excitation(
    c: &mut Circuit,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    theta: f64,
) -> Result<(), CircuitError> {
    use std::f64::consts::FRAC_PI_2;
    let wires = [i, j, k, l];
    for (idx, &a) in wires.iter().enumerate() {
        for &b in wires.iter().skip(idx + 1) {
            if a == b {
                return Err(CircuitError::RepeatedQubit(a));
            }
        }
    }
    let q = theta / 4.0;
    // opening ladder and X/H dressing
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Cnot(k, l))?;
    c.push(Gate::Cnot(i, k))?;
    c.push(Gate::X(j))?;
    c.push(Gate::X(l))?;
    c.push(Gate::Ry(i, q))?;
    c.push(Gate::H(j))?;
    // interleaved ±θ/4 rotations on the first wire
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Ry(i, -q))?;
    c.push(Gate::H(l))?;
    c.push(Gate::Cnot(i, l))?;
    c.push(Gate::Ry(i, q))?;
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Ry(i, -q))?;
    c.push(Gate::H(k))?;
    c.push(Gate::Cnot(i, k))?;
    c.push(Gate::Ry(i, q))?;
    c.push(Gate::H(k))?;
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Ry(i, -q))?;
    c.push(Gate::Cnot(i, l))?;
    c.push(Gate::Ry(i, q))?;
    c.push(Gate::H(l))?;
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Ry(k, FRAC_PI_2))?;
    c.push(Gate::Ry(i, -q))?;
    c.push(Gate::H(j))?;
    c.push(Gate::P(k, FRAC_PI_2))?;
    c.push(Gate::Cnot(i, k))?;
    // phase dressing and closing ladder
    c.push(Gate::P(i, FRAC_PI_2))?;
    c.push(Gate::P(k, -FRAC_PI_2))?;
    c.push(Gate::X(j))?;
    c.push(Gate::Ry(k, -FRAC_PI_2))?;
    c.push(Gate::X(l))?;
    c.push(Gate::Cnot(i, j))?;
    c.push(Gate::Cnot(k, l))?;
    Ok(())
}

/// Ansatz realization: X gates preparing the reference occupation, then each
/// operator's circuit in ansatz order (earliest operator applied first).
pub fn ansatz_circuit(
    ops: &[(ExcitationOp, f64)],
    n_qubits: usize,
    reference_occupation: u64,
) -> Result<Circuit, CircuitError> {
    let mut c = Circuit::new(n_qubits);
    for q in 0..n_qubits {
        if reference_occupation & (1u64 << q) != 0 {
            c.push(Gate::X(q))?;
        }
    }
    for &(op, theta) in ops {
        match op {
            ExcitationOp::Single { i, a } => append_single_excitation(&mut c, a, i, theta)?,
            ExcitationOp::Double { i, j, a, b } => {
                append_double_excitation(&mut c, i, j, a, b, theta)?
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singles_gate_counts() {
        let c = build_single_excitation(4, 0, 2, 0.3).unwrap();
        assert_eq!(c.gate_counts(), (8, 2));
    }

    #[test]
    fn doubles_gate_counts() {
        let c = build_double_excitation(4, 0, 1, 2, 3, 0.7).unwrap();
        assert_eq!(c.gate_counts(), (23, 13));
    }

    #[test]
    fn repeated_indices_rejected() {
        assert!(build_single_excitation(4, 1, 1, 0.1).is_err());
        assert!(build_double_excitation(4, 0, 1, 2, 1, 0.1).is_err());
    }

    #[test]
    fn empty_ansatz_is_reference_preparation() {
        let c = ansatz_circuit(&[], 6, 0b000011).unwrap();
        assert_eq!(c.gates, vec![Gate::X(0), Gate::X(1)]);
    }

    #[test]
    fn ansatz_gate_counts_are_additive() {
        let ops = vec![
            (ExcitationOp::Double { i: 0, j: 1, a: 2, b: 3 }, 0.2),
            (ExcitationOp::Single { i: 1, a: 3 }, -0.4),
            (ExcitationOp::Double { i: 0, j: 4, a: 3, b: 5 }, 0.1),
        ];
        let c = ansatz_circuit(&ops, 6, 0b010011).unwrap();
        let (one, two) = c.gate_counts();
        assert_eq!(one, 3 + 23 + 8 + 23);
        assert_eq!(two, 13 + 2 + 13);
    }

    #[test]
    fn serialization_round_trip() {
        let mut c = Circuit::new(3);
        c.push(Gate::X(0)).unwrap();
        c.push(Gate::Ry(1, -0.12345678901234567)).unwrap();
        c.push(Gate::Cnot(0, 2)).unwrap();
        c.push(Gate::P(2, std::f64::consts::PI)).unwrap();
        let text = c.to_lines();
        let back = Circuit::from_lines(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn parse_reports_bad_lines() {
        let err = Circuit::from_lines("qubits 2\nfoo 0\n").unwrap_err();
        match err {
            CircuitError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Circuit::from_lines("cnot 0\n").is_err());
        assert!(Circuit::from_lines("rx 0 abc\n").is_err());
    }

    #[test]
    fn out_of_range_gate_rejected() {
        let mut c = Circuit::new(2);
        assert!(matches!(
            c.push(Gate::X(2)),
            Err(CircuitError::QubitOutOfRange { .. })
        ));
    }
}

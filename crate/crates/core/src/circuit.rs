//! Layered circuits of Hadamard, adjacent Swap and adjacent Toffoli
//! gates, with an exact state-vector simulator.
//!
//! Anchor conventions: Hadamard acts on qubit q, Swap on (q, q+1), and
//! Toffoli has controls q, q+1 and target q+2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::ExactAmplitude;

/// Default cap on simulated qubits.
pub const DEFAULT_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Hadamard,
    Swap,
    Toffoli,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Hadamard => 1,
            GateKind::Swap => 2,
            GateKind::Toffoli => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub anchor: usize,
}

impl Gate {
    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::Hadamard,
            anchor: q,
        }
    }

    pub fn swap(q: usize) -> Self {
        Self {
            kind: GateKind::Swap,
            anchor: q,
        }
    }

    pub fn toffoli(q: usize) -> Self {
        Self {
            kind: GateKind::Toffoli,
            anchor: q,
        }
    }

    /// Qubits touched, in increasing order.
    pub fn support(&self) -> std::ops::Range<usize> {
        self.anchor..self.anchor + self.kind.arity()
    }

    /// Rightmost touched qubit. The compiled program places the gate
    /// symbol above this qubit.
    pub fn last_qubit(&self) -> usize {
        self.anchor + self.kind.arity() - 1
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GateKind::Hadamard => "h",
            GateKind::Swap => "swap",
            GateKind::Toffoli => "toffoli",
        };
        write!(f, "{name} {}", self.anchor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

impl Layer {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
}

/// One problem found by [`Circuit::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitViolation {
    #[error("circuit must have at least one qubit")]
    NoQubits,
    #[error("layer {layer} is empty")]
    EmptyLayer { layer: usize },
    #[error("layer {layer}, gate {gate}: `{what}` touches qubit {qubit}, outside 0..{n_qubits}")]
    OutOfRange {
        layer: usize,
        gate: usize,
        what: String,
        qubit: usize,
        n_qubits: usize,
    },
    #[error("layer {layer}: gates {first} and {second} both touch qubit {qubit}")]
    Overlap {
        layer: usize,
        first: usize,
        second: usize,
        qubit: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid circuit: {}", join(.0))]
    Invalid(Vec<CircuitViolation>),
    #[error("input has {bits} bits but the circuit has {n_qubits} qubits")]
    InputTooLong { bits: usize, n_qubits: usize },
    #[error("input contains {0:?}, expected only 0 and 1")]
    BadInput(char),
    #[error("{n_qubits} qubits exceed the simulator cap of {cap}")]
    TooManyQubits { n_qubits: usize, cap: usize },
}

fn join(v: &[CircuitViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses a bit string such as "110".
pub fn parse_bits(s: &str) -> Result<Vec<bool>, CircuitError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CircuitError::BadInput(other)),
        })
        .collect()
}

impl Circuit {
    pub fn new(n_qubits: usize, layers: Vec<Layer>) -> Self {
        Self { n_qubits, layers }
    }

    /// Checks qubit ranges, layer disjointness and nonempty layers.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut errors = Vec::new();
        if self.n_qubits == 0 {
            errors.push(CircuitViolation::NoQubits);
        }
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.gates.is_empty() {
                errors.push(CircuitViolation::EmptyLayer { layer: li });
            }
            let mut owner: Vec<Option<usize>> = vec![None; self.n_qubits];
            for (gi, gate) in layer.gates.iter().enumerate() {
                if gate.last_qubit() >= self.n_qubits {
                    errors.push(CircuitViolation::OutOfRange {
                        layer: li,
                        gate: gi,
                        what: gate.to_string(),
                        qubit: gate.last_qubit(),
                        n_qubits: self.n_qubits,
                    });
                    continue;
                }
                for q in gate.support() {
                    if let Some(first) = owner[q] {
                        errors.push(CircuitViolation::Overlap {
                            layer: li,
                            first,
                            second: gi,
                            qubit: q,
                        });
                    } else {
                        owner[q] = Some(gi);
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(errors))
        }
    }

    /// Exact ⟨x,0|U|x,0⟩. The circuit must be valid.
    pub fn overlap(&self, x: &[bool]) -> Result<ExactAmplitude, CircuitError> {
        self.overlap_with_cap(x, DEFAULT_MAX_QUBITS)
    }

    pub fn overlap_with_cap(&self, x: &[bool], cap: usize) -> Result<ExactAmplitude, CircuitError> {
        self.validate()?;
        let basis = self.basis_index(x)?;
        let mut state = ExactState::basis(self.n_qubits, basis, cap)?;
        state.apply_circuit(self);
        Ok(state.amplitudes[basis].clone())
    }

    /// Floating-point ⟨x,0|U|x,0⟩.
    pub fn overlap_f64(&self, x: &[bool]) -> Result<f64, CircuitError> {
        self.validate()?;
        let basis = self.basis_index(x)?;
        let mut state = FloatState::basis(self.n_qubits, basis, DEFAULT_MAX_QUBITS)?;
        state.apply_circuit(self);
        Ok(state.amplitudes[basis])
    }

    /// Index of |x,0⟩; qubit q is bit q of the index.
    pub fn basis_index(&self, x: &[bool]) -> Result<usize, CircuitError> {
        if x.len() > self.n_qubits {
            return Err(CircuitError::InputTooLong {
                bits: x.len(),
                n_qubits: self.n_qubits,
            });
        }
        Ok(x
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(q, _)| 1usize << q)
            .sum())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    /// Text format: a `qubits N` header, gate lines `h Q`, `swap Q` or
    /// `toffoli Q`, layers separated by `---`, and `#` comments.
    fn from_str(text: &str) -> Result<Self, CircuitError> {
        let mut n_qubits = None;
        let mut layers = Vec::new();
        let mut current = Layer::default();
        let mut pending = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::Parse {
                line: line_no,
                message,
            };
            if line.starts_with("---") {
                if line.chars().any(|c| c != '-') {
                    return Err(err(format!("unexpected text in separator {line:?}")));
                }
                layers.push(std::mem::take(&mut current));
                pending = false;
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            if n_qubits.is_none() {
                match words.as_slice() {
                    ["qubits", n] => {
                        n_qubits = Some(
                            n.parse::<usize>()
                                .map_err(|_| err(format!("bad qubit count {n:?}")))?,
                        );
                        continue;
                    }
                    _ => return Err(err("expected `qubits N` header".into())),
                }
            }
            let (name, arg) = match words.as_slice() {
                [name, arg] => (*name, *arg),
                _ => return Err(err(format!("expected `GATE QUBIT`, got {line:?}"))),
            };
            let anchor: usize = arg
                .parse()
                .map_err(|_| err(format!("bad qubit index {arg:?}")))?;
            let gate = match name.to_ascii_lowercase().as_str() {
                "h" => Gate::h(anchor),
                "swap" => Gate::swap(anchor),
                "toffoli" => Gate::toffoli(anchor),
                other => return Err(err(format!("unknown gate {other:?}"))),
            };
            current.gates.push(gate);
            pending = true;
        }
        let n_qubits = n_qubits.ok_or(CircuitError::Parse {
            line: 0,
            message: "missing `qubits N` header".into(),
        })?;
        if pending || !current.gates.is_empty() {
            layers.push(current);
        }
        Ok(Self { n_qubits, layers })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                writeln!(f, "---")?;
            }
            for g in &layer.gates {
                writeln!(f, "{g}")?;
            }
        }
        Ok(())
    }
}

/// Dense state vector with exact amplitudes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactState {
    pub n_qubits: usize,
    pub amplitudes: Vec<ExactAmplitude>,
}

impl ExactState {
    pub fn basis(n_qubits: usize, index: usize, cap: usize) -> Result<Self, CircuitError> {
        if n_qubits > cap {
            return Err(CircuitError::TooManyQubits { n_qubits, cap });
        }
        let mut amplitudes = vec![ExactAmplitude::zero(); 1 << n_qubits];
        amplitudes[index] = ExactAmplitude::one();
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn norm_squared(&self) -> ExactAmplitude {
        self.amplitudes
            .iter()
            .fold(ExactAmplitude::zero(), |acc, a| &acc + &(a * a))
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) {
        for layer in &circuit.layers {
            for &gate in &layer.gates {
                self.apply(gate);
            }
        }
    }

    pub fn apply(&mut self, gate: Gate) {
        let q = gate.anchor;
        match gate.kind {
            GateKind::Hadamard => {
                let h = ExactAmplitude::inv_sqrt2();
                let bit = 1 << q;
                for i in 0..self.amplitudes.len() {
                    if i & bit == 0 {
                        let a0 = self.amplitudes[i].clone();
                        let a1 = self.amplitudes[i | bit].clone();
                        self.amplitudes[i] = &h * &(&a0 + &a1);
                        self.amplitudes[i | bit] = &h * &(&a0 - &a1);
                    }
                }
            }
            _ => permute(&mut self.amplitudes, gate),
        }
    }
}

/// Dense state vector with f64 amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatState {
    pub n_qubits: usize,
    pub amplitudes: Vec<f64>,
}

impl FloatState {
    pub fn basis(n_qubits: usize, index: usize, cap: usize) -> Result<Self, CircuitError> {
        if n_qubits > cap {
            return Err(CircuitError::TooManyQubits { n_qubits, cap });
        }
        let mut amplitudes = vec![0.0; 1 << n_qubits];
        amplitudes[index] = 1.0;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) {
        for layer in &circuit.layers {
            for &gate in &layer.gates {
                self.apply(gate);
            }
        }
    }

    pub fn apply(&mut self, gate: Gate) {
        let q = gate.anchor;
        match gate.kind {
            GateKind::Hadamard => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let bit = 1 << q;
                for i in 0..self.amplitudes.len() {
                    if i & bit == 0 {
                        let a0 = self.amplitudes[i];
                        let a1 = self.amplitudes[i | bit];
                        self.amplitudes[i] = h * (a0 + a1);
                        self.amplitudes[i | bit] = h * (a0 - a1);
                    }
                }
            }
            _ => permute(&mut self.amplitudes, gate),
        }
    }
}

/// Applies a permutation gate (Swap or Toffoli) to a dense vector.
fn permute<T>(amplitudes: &mut [T], gate: Gate) {
    let q = gate.anchor;
    for i in 0..amplitudes.len() {
        let j = permuted_index(i, gate, q);
        if i < j {
            amplitudes.swap(i, j);
        }
    }
}

fn permuted_index(i: usize, gate: Gate, q: usize) -> usize {
    match gate.kind {
        GateKind::Swap => {
            let b0 = (i >> q) & 1;
            let b1 = (i >> (q + 1)) & 1;
            if b0 == b1 {
                i
            } else {
                i ^ (0b11 << q)
            }
        }
        GateKind::Toffoli => {
            if (i >> q) & 1 == 1 && (i >> (q + 1)) & 1 == 1 {
                i ^ (1 << (q + 2))
            } else {
                i
            }
        }
        GateKind::Hadamard => i,
    }
}

//! Circuit data model and its line-oriented text form.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gate::{gate_unitary, GateError, GateKind, Unitary};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: GateKind,
    pub operands: Vec<usize>,
    pub params: Vec<f64>,
}

impl Instruction {
    pub fn new(kind: GateKind, operands: Vec<usize>, params: Vec<f64>) -> Self {
        Instruction {
            kind,
            operands,
            params,
        }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Instruction::new(kind, vec![q], Vec::new())
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Instruction::new(kind, vec![a, b], Vec::new())
    }

    pub fn r(q: usize, theta: f64, phi: f64) -> Self {
        Instruction::new(GateKind::R, vec![q], vec![theta, phi])
    }

    pub fn xx(a: usize, b: usize, chi: f64) -> Self {
        Instruction::new(GateKind::XX, vec![a, b], vec![chi])
    }

    pub fn zx(a: usize, b: usize, chi: f64) -> Self {
        Instruction::new(GateKind::ZX, vec![a, b], vec![chi])
    }

    pub fn unitary(&self) -> Result<Unitary, GateError> {
        gate_unitary(self.kind, &self.params)
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.operands.contains(&q)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in &self.operands {
            write!(f, " {q}")?;
        }
        for (name, value) in self.kind.param_names().iter().zip(&self.params) {
            write!(f, " {name}={value}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub instructions: Vec<Instruction>,
    pub measured: Vec<usize>,
    /// Qubits prepared in |1> instead of |0>.
    pub initial_ones: BTreeSet<usize>,
    /// Measured qubits whose reported bit is inverted classically. Constant
    /// propagation uses this in place of a quantum X before readout.
    pub complemented: BTreeSet<usize>,
    /// Physical qubit behind each circuit qubit, set by routing.
    pub layout: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("qubit cap exceeded: {0} > {MAX_QUBITS}")]
    QubitCapExceeded(usize),
    #[error("instruction {index}: {kind} expects {expected} operand(s), got {got}")]
    Arity {
        index: usize,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("instruction {index}: duplicate operands")]
    DuplicateOperands { index: usize },
    #[error("instruction {index}: operand {qubit} out of range")]
    OperandOutOfRange { index: usize, qubit: usize },
    #[error("instruction {index}: {kind} expects {expected} parameter(s), got {got}")]
    ParamCount {
        index: usize,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("instruction {index}: non-finite parameter")]
    NonFiniteParam { index: usize },
    #[error("measured qubit {0} out of range")]
    MeasuredOutOfRange(usize),
    #[error("qubit {0} measured twice")]
    DuplicateMeasurement(usize),
    #[error("initial |1> qubit {0} out of range")]
    InitialOutOfRange(usize),
    #[error("complemented qubit {0} is not measured")]
    ComplementNotMeasured(usize),
    #[error("layout has {got} entries for {expected} qubits")]
    LayoutLength { expected: usize, got: usize },
    #[error("layout maps two qubits to physical {0}")]
    LayoutNotInjective(usize),
}

/// Collects every invariant violation. Never panics.
pub fn validate(c: &Circuit) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    if c.n_qubits > MAX_QUBITS {
        errors.push(ValidationError::QubitCapExceeded(c.n_qubits));
    }
    for (index, inst) in c.instructions.iter().enumerate() {
        let kind = inst.kind;
        if inst.operands.len() != kind.arity() {
            errors.push(ValidationError::Arity {
                index,
                kind,
                expected: kind.arity(),
                got: inst.operands.len(),
            });
        }
        if inst.operands.len() == 2 && inst.operands[0] == inst.operands[1] {
            errors.push(ValidationError::DuplicateOperands { index });
        }
        for &qubit in &inst.operands {
            if qubit >= c.n_qubits {
                errors.push(ValidationError::OperandOutOfRange { index, qubit });
            }
        }
        if inst.params.len() != kind.param_count() {
            errors.push(ValidationError::ParamCount {
                index,
                kind,
                expected: kind.param_count(),
                got: inst.params.len(),
            });
        }
        if inst.params.iter().any(|p| !p.is_finite()) {
            errors.push(ValidationError::NonFiniteParam { index });
        }
    }
    let mut seen = BTreeSet::new();
    for &q in &c.measured {
        if q >= c.n_qubits {
            errors.push(ValidationError::MeasuredOutOfRange(q));
        }
        if !seen.insert(q) {
            errors.push(ValidationError::DuplicateMeasurement(q));
        }
    }
    for &q in &c.initial_ones {
        if q >= c.n_qubits {
            errors.push(ValidationError::InitialOutOfRange(q));
        }
    }
    for &q in &c.complemented {
        if !seen.contains(&q) {
            errors.push(ValidationError::ComplementNotMeasured(q));
        }
    }
    if let Some(layout) = &c.layout {
        if layout.len() != c.n_qubits {
            errors.push(ValidationError::LayoutLength {
                expected: c.n_qubits,
                got: layout.len(),
            });
        }
        let mut phys = BTreeSet::new();
        for &p in layout {
            if !phys.insert(p) {
                errors.push(ValidationError::LayoutNotInjective(p));
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

pub fn two_qubit_gate_count(c: &Circuit) -> usize {
    c.instructions
        .iter()
        .filter(|i| i.kind.arity() == 2)
        .count()
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            ..Circuit::default()
        }
    }

    /// Copy with the same header but no instructions.
    pub fn empty_like(&self) -> Self {
        Circuit {
            instructions: Vec::new(),
            ..self.clone()
        }
    }

    pub fn push(&mut self, inst: Instruction) -> &mut Self {
        self.instructions.push(inst);
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::single(GateKind::H, q))
    }

    pub fn t(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::single(GateKind::T, q))
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::single(GateKind::X, q))
    }

    pub fn y(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::single(GateKind::Y, q))
    }

    pub fn r(&mut self, q: usize, theta: f64, phi: f64) -> &mut Self {
        self.push(Instruction::r(q, theta, phi))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Instruction::two(GateKind::CNOT, control, target))
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Instruction::two(GateKind::CZ, a, b))
    }

    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Instruction::two(GateKind::SWAP, a, b))
    }

    pub fn measure(&mut self, qubits: &[usize]) -> &mut Self {
        self.measured = qubits.to_vec();
        self
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.measured = (0..self.n_qubits).collect();
        self
    }

    pub fn prepare_one(&mut self, q: usize) -> &mut Self {
        self.initial_ones.insert(q);
        self
    }

    /// Text form; see [`Circuit::from_str`] for the grammar.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn join(values: impl IntoIterator<Item = usize>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        if !self.initial_ones.is_empty() {
            writeln!(f, "ones {}", join(self.initial_ones.iter().copied()))?;
        }
        if !self.measured.is_empty() {
            writeln!(f, "measure {}", join(self.measured.iter().copied()))?;
        }
        if !self.complemented.is_empty() {
            writeln!(f, "complement {}", join(self.complemented.iter().copied()))?;
        }
        if let Some(layout) = &self.layout {
            writeln!(f, "layout {}", join(layout.iter().copied()))?;
        }
        for inst in &self.instructions {
            writeln!(f, "{inst}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn parse_list(text: &str, line: usize) -> Result<Vec<usize>, ParseError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| ParseError {
                line,
                message: format!("bad qubit index {s:?}"),
            })
        })
        .collect()
}

impl FromStr for Circuit {
    type Err = ParseError;

    /// Blank lines and `#` comments are ignored. The `qubits` header must come
    /// before any instruction.
    fn from_str(text: &str) -> Result<Self, ParseError> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| ParseError { line, message };
            let (head, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
            let rest = rest.trim();
            if head == "qubits" {
                if circuit.is_some() {
                    return Err(err("repeated qubits header".into()));
                }
                let n = rest
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad qubit count {rest:?}")))?;
                circuit = Some(Circuit::new(n));
                continue;
            }
            let c = circuit
                .as_mut()
                .ok_or_else(|| err("missing qubits header".into()))?;
            match head {
                "ones" => c.initial_ones = parse_list(rest, line)?.into_iter().collect(),
                "measure" => c.measured = parse_list(rest, line)?,
                "complement" => c.complemented = parse_list(rest, line)?.into_iter().collect(),
                "layout" => c.layout = Some(parse_list(rest, line)?),
                name => {
                    let kind = GateKind::from_name(name)
                        .ok_or_else(|| err(format!("unknown gate {name:?}")))?;
                    let mut operands = Vec::new();
                    let mut params = vec![None; kind.param_count()];
                    for token in rest.split_whitespace() {
                        if let Some((key, value)) = token.split_once('=') {
                            let slot = kind
                                .param_names()
                                .iter()
                                .position(|n| *n == key)
                                .ok_or_else(|| err(format!("{kind} has no parameter {key:?}")))?;
                            let v = value
                                .parse::<f64>()
                                .map_err(|_| err(format!("bad value {value:?}")))?;
                            params[slot] = Some(v);
                        } else {
                            operands.push(
                                token
                                    .parse::<usize>()
                                    .map_err(|_| err(format!("bad operand {token:?}")))?,
                            );
                        }
                    }
                    let params = params
                        .into_iter()
                        .zip(kind.param_names())
                        .map(|(p, n)| p.ok_or_else(|| err(format!("{kind} missing {n}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    c.instructions.push(Instruction::new(kind, operands, params));
                }
            }
        }
        circuit.ok_or(ParseError {
            line: 0,
            message: "missing qubits header".into(),
        })
    }
}

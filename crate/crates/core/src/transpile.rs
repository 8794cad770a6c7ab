//! Native-gate decomposition and the three optimisation passes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Circuit, Instruction};
use crate::gate::{EntanglingFamily, GateKind, NativeGateSet};

const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranspileError {
    #[error("native set {0} lacks the R rotation")]
    MissingRotation(String),
    #[error("{kind} cannot be expressed in native set {native}")]
    Unsupported { kind: GateKind, native: String },
    #[error("unknown pass {0:?}")]
    UnknownPass(String),
}

/// True when `x` equals `target` modulo 2π.
pub fn angle_eq(x: f64, target: f64) -> bool {
    let d = (x - target).rem_euclid(TAU);
    d < ANGLE_TOL || TAU - d < ANGLE_TOL
}

fn wrap(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if TAU - w < ANGLE_TOL {
        0.0
    } else {
        w
    }
}

/// Reduces into (-π, π].
fn wrap_symmetric(x: f64) -> f64 {
    let w = wrap(x);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// H as two rotations in time order: `R(π,0)` then `R(π/2,π/2)`.
pub fn decompose_h(q: usize) -> [Instruction; 2] {
    [Instruction::r(q, PI, 0.0), Instruction::r(q, FRAC_PI_2, FRAC_PI_2)]
}

/// A Z rotation by `alpha` as two π rotations.
pub fn z_rotation(q: usize, alpha: f64) -> [Instruction; 2] {
    [Instruction::r(q, PI, 0.0), Instruction::r(q, PI, -alpha / 2.0)]
}

pub fn decompose_cnot(
    native: &NativeGateSet,
    control: usize,
    target: usize,
) -> Result<Vec<Instruction>, TranspileError> {
    if !native.single_qubit.contains(&GateKind::R) {
        return Err(TranspileError::MissingRotation(native.name.clone()));
    }
    let (c, t) = (control, target);
    Ok(match native.family {
        EntanglingFamily::Zx => vec![
            Instruction::zx(c, t, FRAC_PI_4),
            Instruction::r(t, -FRAC_PI_2, 0.0),
            Instruction::r(c, PI, 0.0),
            Instruction::r(c, PI, FRAC_PI_4),
        ],
        EntanglingFamily::Xx => vec![
            Instruction::r(c, FRAC_PI_2, -FRAC_PI_2),
            Instruction::xx(c, t, FRAC_PI_4),
            Instruction::r(c, -FRAC_PI_2, 0.0),
            Instruction::r(c, FRAC_PI_2, FRAC_PI_2),
            Instruction::r(t, -FRAC_PI_2, 0.0),
        ],
        EntanglingFamily::Cz => {
            let mut out = decompose_h(t).to_vec();
            out.push(Instruction::two(GateKind::CZ, c, t));
            out.extend(decompose_h(t));
            out
        }
    })
}

pub fn decompose_swap(a: usize, b: usize) -> [Instruction; 3] {
    [
        Instruction::two(GateKind::CNOT, a, b),
        Instruction::two(GateKind::CNOT, b, a),
        Instruction::two(GateKind::CNOT, a, b),
    ]
}

/// Rewrites every instruction into R plus the native entangler.
pub fn decompose(c: &Circuit, native: &NativeGateSet) -> Result<Circuit, TranspileError> {
    if !native.single_qubit.contains(&GateKind::R) {
        return Err(TranspileError::MissingRotation(native.name.clone()));
    }
    let mut out = c.empty_like();
    for inst in &c.instructions {
        lower(inst, native, &mut out.instructions)?;
    }
    Ok(out)
}

fn lower(
    inst: &Instruction,
    native: &NativeGateSet,
    out: &mut Vec<Instruction>,
) -> Result<(), TranspileError> {
    let ops = &inst.operands;
    match inst.kind {
        GateKind::R => out.push(inst.clone()),
        GateKind::X => out.push(Instruction::r(ops[0], PI, 0.0)),
        GateKind::Y => out.push(Instruction::r(ops[0], PI, FRAC_PI_2)),
        GateKind::H => out.extend(decompose_h(ops[0])),
        GateKind::T => out.extend(z_rotation(ops[0], FRAC_PI_4)),
        GateKind::CNOT => out.extend(decompose_cnot(native, ops[0], ops[1])?),
        GateKind::SWAP => {
            for cnot in decompose_swap(ops[0], ops[1]) {
                lower(&cnot, native, out)?;
            }
        }
        kind if native.two_qubit.contains(&kind) => out.push(inst.clone()),
        GateKind::CZ => {
            out.extend(decompose_h(ops[1]));
            lower(&Instruction::two(GateKind::CNOT, ops[0], ops[1]), native, out)?;
            out.extend(decompose_h(ops[1]));
        }
        kind => {
            return Err(TranspileError::Unsupported {
                kind,
                native: native.name.clone(),
            })
        }
    }
    Ok(())
}

/// Merges neighbouring same-axis rotations on a qubit and drops identities,
/// repeating until nothing changes.
pub fn merge_rotations(c: &Circuit) -> Circuit {
    let mut insts = c.instructions.clone();
    loop {
        let (next, changed) = merge_once(&insts, c.n_qubits);
        insts = next;
        if !changed {
            break;
        }
    }
    Circuit {
        instructions: insts,
        ..c.empty_like()
    }
}

fn merge_once(insts: &[Instruction], n: usize) -> (Vec<Instruction>, bool) {
    let mut out: Vec<Option<Instruction>> = Vec::with_capacity(insts.len());
    // Index in `out` of the last live instruction touching each qubit.
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut changed = false;
    for inst in insts {
        if inst.kind == GateKind::R {
            let q = inst.operands[0];
            let (theta, phi) = (inst.params[0], inst.params[1]);
            if angle_eq(theta, 0.0) {
                changed = true;
                continue;
            }
            if let Some(prev) = last[q].and_then(|i| out[i].as_mut().map(|p| (i, p))) {
                let (i, p) = prev;
                if p.kind == GateKind::R && angle_eq(p.params[1], phi) {
                    changed = true;
                    let sum = p.params[0] + theta;
                    if angle_eq(sum, 0.0) {
                        out[i] = None;
                        last[q] = None;
                    } else {
                        // Equal to the plain sum up to a global sign.
                        p.params[0] = wrap_symmetric(sum);
                    }
                    continue;
                }
            }
        }
        for &q in &inst.operands {
            last[q] = Some(out.len());
        }
        out.push(Some(inst.clone()));
    }
    (out.into_iter().flatten().collect(), changed)
}

fn is_pi_rotation(inst: &Instruction) -> bool {
    inst.kind == GateKind::R && angle_eq(inst.params[0], PI)
}

/// Marks pairs of π rotations that are adjacent on their qubit; such a pair
/// is a pure Z rotation.
fn z_pairs(insts: &[Instruction], n: usize) -> Vec<Option<usize>> {
    let mut partner = vec![None; insts.len()];
    let mut open: Vec<Option<usize>> = vec![None; n];
    for (i, inst) in insts.iter().enumerate() {
        if inst.operands.len() == 1 && is_pi_rotation(inst) {
            let q = inst.operands[0];
            match open[q].take() {
                Some(j) => {
                    partner[j] = Some(i);
                    partner[i] = Some(j);
                }
                None => open[q] = Some(i),
            }
        } else {
            for &q in &inst.operands {
                open[q] = None;
            }
        }
    }
    partner
}

/// Tracks Z rotations classically. T gates and Z-rotation pairs are absorbed
/// into a per-qubit phase frame; later rotations have their phase shifted by
/// the frame. A frame is written back as a Z rotation only when a gate that
/// does not commute with Z arrives, and is dropped at measurement.
pub fn apply_virtual_phase(c: &Circuit) -> Circuit {
    let pairs = z_pairs(&c.instructions, c.n_qubits);
    let mut frame = vec![0.0f64; c.n_qubits];
    let mut out = c.empty_like();
    let emit = &mut out.instructions;
    let flush = |q: usize, frame: &mut Vec<f64>, emit: &mut Vec<Instruction>| {
        if !angle_eq(frame[q], 0.0) {
            emit.extend(z_rotation(q, frame[q]));
        }
        frame[q] = 0.0;
    };
    for (i, inst) in c.instructions.iter().enumerate() {
        let ops = &inst.operands;
        match inst.kind {
            GateKind::T => frame[ops[0]] = wrap(frame[ops[0]] + FRAC_PI_4),
            GateKind::R if pairs[i].is_some() => {
                let j = pairs[i].unwrap();
                if j > i {
                    let (a, b) = (inst.params[1], c.instructions[j].params[1]);
                    frame[ops[0]] = wrap(frame[ops[0]] - 2.0 * (b - a));
                }
            }
            GateKind::R | GateKind::X | GateKind::Y => {
                let q = ops[0];
                if angle_eq(frame[q], 0.0) {
                    emit.push(inst.clone());
                } else {
                    let (theta, phi) = match inst.kind {
                        GateKind::R => (inst.params[0], inst.params[1]),
                        GateKind::X => (PI, 0.0),
                        _ => (PI, FRAC_PI_2),
                    };
                    emit.push(Instruction::r(q, theta, wrap(phi + frame[q])));
                }
            }
            GateKind::CZ => emit.push(inst.clone()),
            GateKind::ZX | GateKind::CNOT => {
                flush(ops[1], &mut frame, emit);
                emit.push(inst.clone());
            }
            GateKind::SWAP => {
                frame.swap(ops[0], ops[1]);
                emit.push(inst.clone());
            }
            GateKind::H | GateKind::XX => {
                for &q in ops {
                    flush(q, &mut frame, emit);
                }
                emit.push(inst.clone());
            }
        }
    }
    out
}

/// Follows qubits whose state is a known basis state and removes the gates
/// that only permute such states. Known measured qubits become classical
/// constants: they are prepared in |0> and complemented when the constant is 1.
pub fn propagate_constants(c: &Circuit) -> Circuit {
    let mut known: Vec<Option<bool>> = (0..c.n_qubits)
        .map(|q| Some(c.initial_ones.contains(&q)))
        .collect();
    let mut out = c.empty_like();
    for inst in &c.instructions {
        constant_step(inst, &mut known, &mut out);
    }
    let measured: Vec<usize> = c.measured.clone();
    for (q, bit) in known.iter().enumerate() {
        let Some(bit) = *bit else { continue };
        if measured.contains(&q) {
            out.initial_ones.remove(&q);
            if bit && !out.complemented.insert(q) {
                out.complemented.remove(&q);
            }
        } else {
            set_initial(&mut out, q, bit);
        }
    }
    out
}

fn set_initial(c: &mut Circuit, q: usize, bit: bool) {
    if bit {
        c.initial_ones.insert(q);
    } else {
        c.initial_ones.remove(&q);
    }
}

/// Ends tracking of `q`. Nothing has been emitted on a tracked qubit yet, so
/// its value can be folded into the preparation.
fn release(q: usize, known: &mut [Option<bool>], out: &mut Circuit) {
    if let Some(bit) = known[q].take() {
        set_initial(out, q, bit);
    }
}

fn constant_step(inst: &Instruction, known: &mut [Option<bool>], out: &mut Circuit) {
    let ops = &inst.operands;
    match inst.kind {
        GateKind::X | GateKind::Y if known[ops[0]].is_some() => {
            known[ops[0]] = known[ops[0]].map(|b| !b);
            return;
        }
        GateKind::T if known[ops[0]].is_some() => return,
        GateKind::R if known[ops[0]].is_some() => {
            let theta = inst.params[0];
            if angle_eq(theta, 0.0) {
                return;
            }
            if angle_eq(theta, PI) {
                known[ops[0]] = known[ops[0]].map(|b| !b);
                return;
            }
        }
        GateKind::CNOT => match known[ops[0]] {
            Some(false) => return,
            Some(true) => {
                constant_step(&Instruction::single(GateKind::X, ops[1]), known, out);
                return;
            }
            None => {}
        },
        GateKind::SWAP => {
            if let (Some(a), Some(b)) = (known[ops[0]], known[ops[1]]) {
                known[ops[0]] = Some(b);
                known[ops[1]] = Some(a);
                return;
            }
        }
        GateKind::CZ => match (known[ops[0]], known[ops[1]]) {
            (Some(_), Some(_)) | (Some(false), _) | (_, Some(false)) => return,
            _ => {}
        },
        _ => {}
    }
    for &q in ops {
        release(q, known, out);
    }
    out.instructions.push(inst.clone());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pass {
    PropagateConstants,
    Decompose,
    MergeRotations,
    VirtualPhase,
}

impl Pass {
    pub const DEFAULT: [Pass; 4] = [
        Pass::PropagateConstants,
        Pass::Decompose,
        Pass::MergeRotations,
        Pass::VirtualPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pass::PropagateConstants => "propagate_constants",
            Pass::Decompose => "decompose",
            Pass::MergeRotations => "merge_rotations",
            Pass::VirtualPhase => "apply_virtual_phase",
        }
    }

    /// Parses a comma-separated list. An empty string is the empty list.
    pub fn parse_list(text: &str) -> Result<Vec<Pass>, TranspileError> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = TranspileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.replace('-', "_").as_str() {
            "propagate_constants" | "constants" => Pass::PropagateConstants,
            "decompose" => Pass::Decompose,
            "merge_rotations" | "merge" => Pass::MergeRotations,
            "apply_virtual_phase" | "virtual_phase" => Pass::VirtualPhase,
            _ => return Err(TranspileError::UnknownPass(s.to_string())),
        })
    }
}

/// Runs `passes` in order. Decomposition is always performed: when the list
/// omits it, it runs right after any leading constant propagation. A final
/// decomposition lowers anything a later pass reintroduced (constant
/// propagation can emit X).
pub fn transpile(
    c: &Circuit,
    native: &NativeGateSet,
    passes: &[Pass],
) -> Result<Circuit, TranspileError> {
    let mut plan = passes.to_vec();
    if !plan.contains(&Pass::Decompose) {
        let at = plan
            .iter()
            .position(|p| *p != Pass::PropagateConstants)
            .unwrap_or(plan.len());
        plan.insert(at, Pass::Decompose);
    }
    let mut cur = c.clone();
    for pass in plan {
        cur = match pass {
            Pass::PropagateConstants => propagate_constants(&cur),
            Pass::Decompose => decompose(&cur, native)?,
            Pass::MergeRotations => merge_rotations(&cur),
            Pass::VirtualPhase => apply_virtual_phase(&cur),
        };
    }
    if cur.instructions.iter().any(|i| !native.contains(i.kind)) {
        cur = decompose(&cur, native)?;
    }
    Ok(cur)
}

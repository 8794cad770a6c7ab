//! Stochastic error channels and the Monte Carlo trajectory engine.
//!
//! Every shot owns a ChaCha stream selected by its index, and it consumes the
//! same sequence of random numbers whatever the noise strengths are. Sweeping
//! a parameter with a fixed seed therefore reuses the random numbers (common
//! random numbers), which keeps calibration curves smooth.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Instruction};
use crate::gate::{pauli_rotation, GateKind, C64};
use crate::sim::{check, complement_mask, cumulative, draw, initial_index, Histogram, Op, SimError, StateVector};
use crate::topology::TopologyGraph;
use crate::transpile::decompose_swap;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid noise profile: {0}")]
    InvalidProfile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamModel {
    /// Probability that a true 0 reads as 1.
    pub p_read_0: f64,
    /// Probability that a true 1 reads as 0.
    pub p_read_1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepolarizingModel {
    pub p2: f64,
    /// Defaults to `p2 / 10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
}

impl DepolarizingModel {
    pub fn p1(&self) -> f64 {
        self.p1.unwrap_or(self.p2 / 10.0)
    }
}

/// Generator of the coherent error applied after each two-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoherentAxis {
    /// The gate's own interaction: the angle of XX or ZX is shifted, CZ (and
    /// the cross-resonance realisation of CNOT) picks up ZZ and ZX.
    #[default]
    Entangling,
    /// A fixed two-qubit Pauli product in the operand frame, e.g. `YZ`.
    Pauli(usize, usize),
}

impl CoherentAxis {
    fn paulis(self, kind: GateKind) -> (usize, usize) {
        match self {
            CoherentAxis::Pauli(a, b) => (a, b),
            CoherentAxis::Entangling => match kind {
                GateKind::XX => (1, 1),
                GateKind::CZ => (3, 3),
                _ => (3, 1),
            },
        }
    }
}

const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl fmt::Display for CoherentAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoherentAxis::Entangling => f.write_str("entangling"),
            CoherentAxis::Pauli(a, b) => write!(f, "{}{}", PAULI_LABELS[*a], PAULI_LABELS[*b]),
        }
    }
}

impl FromStr for CoherentAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("entangling") {
            return Ok(CoherentAxis::Entangling);
        }
        let idx = |c: char| PAULI_LABELS.iter().position(|&l| l == c.to_ascii_uppercase());
        let chars: Vec<char> = s.chars().collect();
        match chars[..] {
            [a, b] => match (idx(a), idx(b)) {
                (Some(0), Some(0)) => Err("axis II is the identity".into()),
                (Some(a), Some(b)) => Ok(CoherentAxis::Pauli(a, b)),
                _ => Err(format!("bad axis {s:?}")),
            },
            _ => Err(format!("bad axis {s:?}")),
        }
    }
}

impl Serialize for CoherentAxis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CoherentAxis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Per-shot Gaussian over-rotation, frozen for the duration of a shot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiStaticCoherentModel {
    pub sigma: f64,
    /// Systematic over-rotation added to every shot.
    pub fixed: f64,
    pub axis: CoherentAxis,
    /// Spread of an offset drawn once per run from the seed, modelling
    /// run-to-run drift. Zero disables it.
    pub run_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosstalkModel {
    pub p_ct: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseProfile {
    pub spam: SpamModel,
    pub depol: DepolarizingModel,
    pub coherent: QuasiStaticCoherentModel,
    pub crosstalk: CrosstalkModel,
    pub topology: Option<TopologyGraph>,
}

fn probability(name: &str, p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::InvalidProfile(format!("{name} = {p} is not in [0, 1]")))
    }
}

impl NoiseProfile {
    pub fn noiseless() -> Self {
        NoiseProfile::default()
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        probability("p_read_0", self.spam.p_read_0)?;
        probability("p_read_1", self.spam.p_read_1)?;
        probability("p2", self.depol.p2)?;
        probability("p1", self.depol.p1())?;
        probability("p_ct", self.crosstalk.p_ct)?;
        let c = &self.coherent;
        for (name, v) in [("sigma", c.sigma), ("run_sigma", c.run_sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(NoiseError::InvalidProfile(format!("{name} = {v} must be >= 0")));
            }
        }
        if !c.fixed.is_finite() {
            return Err(NoiseError::InvalidProfile("fixed must be finite".into()));
        }
        if self.crosstalk.p_ct > 0.0 && self.topology.is_none() {
            return Err(NoiseError::InvalidProfile("crosstalk requires a topology".into()));
        }
        Ok(())
    }

    /// The same profile with only the depolarizing channel kept.
    pub fn depolarizing_only(p2: f64) -> Self {
        NoiseProfile {
            depol: DepolarizingModel { p2, p1: None },
            ..NoiseProfile::default()
        }
    }
}

/// Flips each bit of `bits` with the readout probability for its value.
pub fn apply_readout_error<R: Rng + ?Sized>(bits: &str, spam: &SpamModel, rng: &mut R) -> String {
    bits.chars()
        .map(|b| {
            let u: f64 = rng.random();
            match b {
                '0' if u < spam.p_read_0 => '1',
                '1' if u < spam.p_read_1 => '0',
                other => other,
            }
        })
        .collect()
}

struct Gate {
    op: Op,
    two: Option<(usize, usize, (usize, usize))>,
    spectators: Vec<usize>,
}

/// Everything about a circuit that does not depend on the shot.
struct Plan {
    gates: Vec<Gate>,
    measure_masks: Vec<usize>,
    complement: usize,
    ideal_cdf: Vec<f64>,
    /// (gate index, state before that gate), ascending.
    checkpoints: Vec<(usize, StateVector)>,
    first_two_qubit: Option<usize>,
}

const CHECKPOINT_BUDGET_BYTES: usize = 64 << 20;

fn spectators_of(c: &Circuit, topology: Option<&TopologyGraph>, a: usize, b: usize) -> Vec<usize> {
    let Some(g) = topology else {
        return Vec::new();
    };
    let phys = |q: usize| c.layout.as_ref().map_or(q, |l| l[q]);
    let (pa, pb) = (phys(a), phys(b));
    (0..c.n_qubits)
        .filter(|&q| q != a && q != b)
        .filter(|&q| {
            let p = phys(q);
            p < g.n()
                && pa < g.n()
                && pb < g.n()
                && (g.is_adjacent(p, pa).unwrap_or(false) || g.is_adjacent(p, pb).unwrap_or(false))
        })
        .collect()
}

/// SWAPs reaching the noisy engine are run as their three CNOTs.
fn expand_swaps(c: &Circuit) -> Circuit {
    if !c.instructions.iter().any(|i| i.kind == GateKind::SWAP) {
        return c.clone();
    }
    let mut out = c.empty_like();
    for inst in &c.instructions {
        if inst.kind == GateKind::SWAP {
            out.instructions
                .extend(decompose_swap(inst.operands[0], inst.operands[1]));
        } else {
            out.instructions.push(inst.clone());
        }
    }
    out
}

impl Plan {
    fn new(c: &Circuit, profile: &NoiseProfile) -> Result<Plan, NoiseError> {
        check(c)?;
        if c.measured.is_empty() {
            return Err(SimError::EmptyMeasurement.into());
        }
        let c = expand_swaps(c);
        let n = c.n_qubits;
        let with_ct = profile.crosstalk.p_ct > 0.0;
        let gates = c
            .instructions
            .iter()
            .map(|inst: &Instruction| -> Result<Gate, NoiseError> {
                let op = Op::compile(inst)?;
                let two = match inst.operands[..] {
                    [a, b] => Some((a, b, profile.coherent.axis.paulis(inst.kind))),
                    _ => None,
                };
                let spectators = match two {
                    Some((a, b, _)) if with_ct => spectators_of(&c, profile.topology.as_ref(), a, b),
                    _ => Vec::new(),
                };
                Ok(Gate { op, two, spectators })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let amp_bytes = (1usize << n) * std::mem::size_of::<C64>();
        let max_checkpoints = (CHECKPOINT_BUDGET_BYTES / amp_bytes).max(1);
        let stride = gates.len().div_ceil(max_checkpoints).max(1);
        let mut state = StateVector::basis(n, initial_index(&c))?;
        let mut checkpoints = Vec::new();
        for (g, gate) in gates.iter().enumerate() {
            if g % stride == 0 {
                checkpoints.push((g, state.clone()));
            }
            state.apply_op(&gate.op)?;
        }
        let measure_masks = c.measured.iter().map(|&q| 1 << (n - 1 - q)).collect();
        Ok(Plan {
            first_two_qubit: gates.iter().position(|g| g.two.is_some()),
            gates,
            measure_masks,
            complement: complement_mask(&c),
            ideal_cdf: cumulative(&state.probabilities()),
            checkpoints,
        })
    }

    fn outcome(&self, basis_index: usize) -> usize {
        let k = self.measure_masks.len();
        self.measure_masks
            .iter()
            .enumerate()
            .filter(|(_, &m)| basis_index & m != 0)
            .fold(0, |acc, (j, _)| acc | 1 << (k - 1 - j))
    }
}

fn run_offset(seed: u64, run_sigma: f64) -> f64 {
    if run_sigma == 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    run_sigma * rng.sample::<f64, _>(StandardNormal)
}

fn one_shot(
    plan: &Plan,
    profile: &NoiseProfile,
    base_delta: f64,
    seed: u64,
    shot: u64,
) -> Result<usize, NoiseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    let z: f64 = rng.sample(StandardNormal);
    let delta = base_delta + profile.coherent.sigma * z;
    let (p1, p2, p_ct) = (profile.depol.p1(), profile.depol.p2, profile.crosstalk.p_ct);

    // (gate index, qubit, Pauli) applied right after that gate.
    let mut events: Vec<(usize, usize, usize)> = Vec::new();
    for (g, gate) in plan.gates.iter().enumerate() {
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        match gate.two {
            None => {
                if u < p1 {
                    let Op::One { q, .. } = gate.op else { unreachable!() };
                    events.push((g, q, 1 + (v * 3.0) as usize % 3));
                }
            }
            Some((a, b, _)) => {
                if u < p2 {
                    let k = 1 + (v * 15.0) as usize % 15;
                    if k / 4 != 0 {
                        events.push((g, a, k / 4));
                    }
                    if !k.is_multiple_of(4) {
                        events.push((g, b, k % 4));
                    }
                }
                for &s in &gate.spectators {
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    if u < p_ct {
                        events.push((g, s, 1 + (v * 3.0) as usize % 3));
                    }
                }
            }
        }
    }
    let u_sample: f64 = rng.random();
    let readout: Vec<f64> = (0..plan.measure_masks.len()).map(|_| rng.random()).collect();

    let coherent = delta != 0.0 && plan.first_two_qubit.is_some();
    let basis = if events.is_empty() && !coherent {
        draw(&plan.ideal_cdf, u_sample)
    } else {
        let first = match (events.first(), coherent) {
            (Some((g, _, _)), true) => (*g).min(plan.first_two_qubit.unwrap()),
            (Some((g, _, _)), false) => *g,
            (None, _) => plan.first_two_qubit.unwrap(),
        };
        let idx = plan.checkpoints.partition_point(|(g, _)| *g <= first) - 1;
        let (start, state) = &plan.checkpoints[idx];
        let mut state = state.clone();
        let mut rotations: [[Option<Op>; 4]; 4] = Default::default();
        let mut next_event = 0;
        for (g, gate) in plan.gates.iter().enumerate().skip(*start) {
            state.apply_op(&gate.op)?;
            if let (Some((a, b, (pa, pb))), true) = (gate.two, coherent) {
                let rot = rotations[pa][pb].get_or_insert_with(|| Op::Two {
                    a: 0,
                    b: 0,
                    m: pauli_rotation(delta, pa, pb).entries().try_into().expect("4x4"),
                });
                if let Op::Two { m, .. } = rot {
                    state.apply_op(&Op::Two { a, b, m: *m })?;
                }
            }
            while next_event < events.len() && events[next_event].0 == g {
                let (_, q, p) = events[next_event];
                state.apply_pauli(q, p);
                next_event += 1;
            }
        }
        draw(&cumulative(&state.probabilities()), u_sample)
    };

    let mut outcome = plan.outcome(basis);
    let k = plan.measure_masks.len();
    for (j, u) in readout.iter().enumerate() {
        let bit = 1 << (k - 1 - j);
        let p = if outcome & bit == 0 {
            profile.spam.p_read_0
        } else {
            profile.spam.p_read_1
        };
        if *u < p {
            outcome ^= bit;
        }
    }
    Ok(outcome ^ plan.complement)
}

/// Monte Carlo over shots. The result depends only on the arguments, not on
/// how shots are scheduled across threads.
pub fn run_noisy(
    c: &Circuit,
    profile: &NoiseProfile,
    shots: u64,
    seed: u64,
) -> Result<Histogram, NoiseError> {
    if shots == 0 {
        return Err(SimError::NoShots.into());
    }
    profile.validate()?;
    let plan = Plan::new(c, profile)?;
    let base_delta = profile.coherent.fixed + run_offset(seed, profile.coherent.run_sigma);
    let outcomes = (0..shots)
        .into_par_iter()
        .map(|s| one_shot(&plan, profile, base_delta, seed, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Histogram::from_indices(outcomes, c.measured.len()))
}

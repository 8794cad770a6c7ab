//! Experiment circuits, parameter sweeps and curve fits.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::config::Backend;
use crate::noise::run_noisy;
use crate::sim::{format_outcome, ideal_outcome, wald_ci95};
use crate::topology::{hub_placement, route, QubitMapping};
use crate::transpile::transpile;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spam,
    CnotChain,
    SwapChain,
    Bv,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spam => "spam",
            ExperimentKind::CnotChain => "cnot-chain",
            ExperimentKind::SwapChain => "swap-chain",
            ExperimentKind::Bv => "bv",
        }
    }

    fn tag(self) -> u64 {
        match self {
            ExperimentKind::Spam => 1,
            ExperimentKind::CnotChain => 2,
            ExperimentKind::SwapChain => 3,
            ExperimentKind::Bv => 4,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            ExperimentKind::Spam,
            ExperimentKind::CnotChain,
            ExperimentKind::SwapChain,
            ExperimentKind::Bv,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Experiment(format!("unknown experiment {s:?}")))
    }
}

/// What to run at each grid point. The parameter is the prepared bit for
/// `spam`, the CNOT count for `cnot-chain`, the SWAP count for `swap-chain`
/// and the Hamming weight for `bv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Data-register size for BV.
    pub bv_n: usize,
    /// When set, each BV weight averages over this many random hidden strings
    /// instead of the lowest-index one.
    pub bv_random_strings: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            bv_n: 4,
            bv_random_strings: None,
        }
    }

    pub fn bv(n: usize) -> Self {
        ExperimentSpec {
            bv_n: n,
            ..ExperimentSpec::new(ExperimentKind::Bv)
        }
    }

    /// The grid used when none is given.
    pub fn default_grid(&self) -> Vec<u64> {
        match self.kind {
            ExperimentKind::Spam => vec![0, 1],
            ExperimentKind::CnotChain => (1..=30).map(|b| 2 * b).collect(),
            ExperimentKind::SwapChain => (1..=12).collect(),
            ExperimentKind::Bv => (0..=self.bv_n as u64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecord {
    pub backend: String,
    pub experiment: ExperimentKind,
    pub parameter: u64,
    pub shots: u64,
    pub successes: u64,
    pub seed: u64,
    pub ci95: f64,
}

impl ExperimentRecord {
    pub fn success_rate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.successes as f64 / self.shots as f64
        }
    }
}

pub fn build_spam_circuit(prep_one: bool) -> Circuit {
    let mut c = Circuit::new(1);
    if prep_one {
        c.prepare_one(0);
    }
    c.measure(&[0]);
    c
}

/// H, then `blocks` copies of X · CNOT · Y · CNOT, then H; only the control
/// is measured.
pub fn build_cnot_chain(blocks: usize) -> Circuit {
    let mut c = Circuit::new(2);
    c.h(0);
    for _ in 0..blocks {
        c.x(0).cnot(0, 1).y(0).cnot(0, 1);
    }
    c.h(0).measure(&[0]);
    c
}

/// H on both qubits, `repeats` SWAPs written as three CNOTs each, H on both.
pub fn build_swap_chain(repeats: usize) -> Circuit {
    let mut c = Circuit::new(2);
    c.h(0).h(1);
    for _ in 0..repeats {
        c.cnot(0, 1).cnot(1, 0).cnot(0, 1);
    }
    c.h(0).h(1).measure_all();
    c
}

/// Bernstein-Vazirani with data qubits `0..n` and the ancilla at `n`.
pub fn build_bv(n: usize, hidden: &[bool]) -> Result<Circuit, Error> {
    if hidden.len() != n {
        return Err(Error::Experiment(format!(
            "hidden string has {} bits, expected {n}",
            hidden.len()
        )));
    }
    let mut c = Circuit::new(n + 1);
    c.prepare_one(n);
    for q in 0..=n {
        c.h(q);
    }
    for (q, _) in hidden.iter().enumerate().filter(|(_, &b)| b) {
        c.cnot(q, n);
    }
    for q in 0..n {
        c.h(q);
    }
    c.measure(&(0..n).collect::<Vec<_>>());
    Ok(c)
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>, Error> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Experiment(format!("bad bit {ch:?} in {s:?}"))),
        })
        .collect()
}

/// The weight-`w` string with its ones in the lowest positions.
pub fn lowest_ones(n: usize, w: usize) -> Vec<bool> {
    (0..n).map(|i| i < w).collect()
}

pub fn classical_baseline(n: u32) -> f64 {
    2f64.powi(1 - n as i32)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one grid point, independent of sweep order.
pub fn point_seed(base: u64, kind: ExperimentKind, parameter: u64) -> u64 {
    splitmix(splitmix(splitmix(base) ^ kind.tag()) ^ parameter)
}

fn placement(kind: ExperimentKind, backend: &Backend, n: usize) -> Result<QubitMapping, Error> {
    let g = &backend.topology;
    Ok(match kind {
        ExperimentKind::Bv => hub_placement(g, n)?,
        ExperimentKind::CnotChain | ExperimentKind::SwapChain => {
            let (a, b) = g
                .edges()
                .next()
                .ok_or_else(|| Error::Experiment("topology has no edges".into()))?;
            QubitMapping::new(vec![a, b], g.n())?
        }
        ExperimentKind::Spam => QubitMapping::identity(n, g.n())?,
    })
}

/// A logical circuit after routing and transpilation for `backend`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub circuit: Circuit,
    pub swaps: usize,
}

pub fn prepare(c: &Circuit, kind: ExperimentKind, backend: &Backend) -> Result<Prepared, Error> {
    let mapping = placement(kind, backend, c.n_qubits)?;
    let (routed, _) = route(c, &backend.topology, &mapping)?;
    let swaps = crate::topology::inserted_swaps(c, &routed);
    let circuit = transpile(&routed, &backend.native, &backend.passes)?;
    Ok(Prepared { circuit, swaps })
}

fn ideal_bits(c: &Circuit) -> Result<String, Error> {
    let idx = ideal_outcome(c)?
        .ok_or_else(|| Error::Experiment("noiseless outcome is not deterministic".into()))?;
    Ok(format_outcome(idx, c.measured.len()))
}

/// The logical circuits behind one grid point.
pub fn point_circuits(spec: &ExperimentSpec, parameter: u64, seed: u64) -> Result<Vec<Circuit>, Error> {
    let p = parameter as usize;
    Ok(match spec.kind {
        ExperimentKind::Spam => match parameter {
            0 | 1 => vec![build_spam_circuit(parameter == 1)],
            _ => return Err(Error::Experiment("spam parameter must be 0 or 1".into())),
        },
        ExperimentKind::CnotChain => {
            if p == 0 || p % 2 == 1 {
                return Err(Error::Experiment(format!(
                    "cnot-chain depth {p} must be a positive even CNOT count"
                )));
            }
            vec![build_cnot_chain(p / 2)]
        }
        ExperimentKind::SwapChain => {
            if p == 0 {
                return Err(Error::Experiment("swap-chain needs at least one SWAP".into()));
            }
            vec![build_swap_chain(p)]
        }
        ExperimentKind::Bv => {
            let n = spec.bv_n;
            if p > n {
                return Err(Error::Experiment(format!("weight {p} exceeds n = {n}")));
            }
            match spec.bv_random_strings {
                None => vec![build_bv(n, &lowest_ones(n, p))?],
                Some(r) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..r)
                        .map(|_| {
                            let mut hidden = vec![false; n];
                            for i in sample_indices(&mut rng, n, p) {
                                hidden[i] = true;
                            }
                            build_bv(n, &hidden)
                        })
                        .collect::<Result<_, _>>()?
                }
            }
        }
    })
}

pub fn run_point(
    spec: &ExperimentSpec,
    parameter: u64,
    backend: &Backend,
    shots: u64,
    base_seed: u64,
) -> Result<ExperimentRecord, Error> {
    let seed = point_seed(base_seed, spec.kind, parameter);
    let profile = backend.profile();
    let mut total = 0;
    let mut successes = 0;
    for (i, logical) in point_circuits(spec, parameter, seed)?.iter().enumerate() {
        let target = ideal_bits(logical)?;
        let prepared = prepare(logical, spec.kind, backend)?;
        let h = run_noisy(&prepared.circuit, &profile, shots, seed.wrapping_add(i as u64))?;
        successes += h.count(&target);
        total += h.shots;
    }
    let p = successes as f64 / total as f64;
    Ok(ExperimentRecord {
        backend: backend.name.clone(),
        experiment: spec.kind,
        parameter,
        shots: total,
        successes,
        seed: base_seed,
        ci95: wald_ci95(p, total),
    })
}

/// One record per grid point, in grid order. Points are independent, so the
/// result does not depend on scheduling.
pub fn sweep(
    spec: &ExperimentSpec,
    grid: &[u64],
    backend: &Backend,
    shots: u64,
    seed: u64,
) -> Result<Vec<ExperimentRecord>, Error> {
    grid.iter()
        .map(|&p| run_point(spec, p, backend, shots, seed))
        .collect()
}

pub fn points(records: &[ExperimentRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .map(|r| (r.parameter as f64, r.success_rate()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate data")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Gaussian,
    Linear,
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "gaussian" => Ok(FitModel::Gaussian),
            "linear" => Ok(FitModel::Linear),
            _ => Err(Error::Experiment(format!("unknown model {s:?}"))),
        }
    }
}

/// Gaussian fits carry `(d0, amplitude)`, linear fits `(intercept, slope)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub params: (f64, f64),
    pub residual: f64,
}

impl FitResult {
    pub fn evaluate(&self, d: f64) -> f64 {
        match self.model {
            FitModel::Gaussian => gaussian(d, self.params.0, self.params.1),
            FitModel::Linear => self.params.0 + self.params.1 * d,
        }
    }

    pub fn to_json(&self) -> String {
        let (a, b) = self.params;
        let v = match self.model {
            FitModel::Gaussian => serde_json::json!({
                "model": "gaussian", "d0": a, "amplitude": b, "residual": self.residual,
            }),
            FitModel::Linear => serde_json::json!({
                "model": "linear", "intercept": a, "slope": b, "residual": self.residual,
            }),
        };
        v.to_string()
    }
}

pub const GAUSSIAN_FLOOR: f64 = 0.5;

pub fn gaussian(d: f64, d0: f64, amplitude: f64) -> f64 {
    GAUSSIAN_FLOOR + amplitude * (-(d / d0).powi(2)).exp()
}

pub fn gaussian_sse(points: &[(f64, f64)], d0: f64, amplitude: f64) -> f64 {
    points
        .iter()
        .map(|&(d, y)| (y - gaussian(d, d0, amplitude)).powi(2))
        .sum()
}

const MIN_AMPLITUDE: f64 = 1e-12;

/// Best amplitude for a fixed width: the least-squares value clamped to
/// the allowed range (the objective is a parabola in the amplitude).
fn best_amplitude(points: &[(f64, f64)], d0: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(d, y) in points {
        let e = (-(d / d0).powi(2)).exp();
        num += (y - GAUSSIAN_FLOOR) * e;
        den += e * e;
    }
    if den == 0.0 {
        return MIN_AMPLITUDE;
    }
    (num / den).clamp(MIN_AMPLITUDE, 0.5)
}

fn profile_sse(points: &[(f64, f64)], d0: f64) -> f64 {
    gaussian_sse(points, d0, best_amplitude(points, d0))
}

/// Least squares for `0.5 + A exp(-(d/d0)^2)` with `A` in (0, 0.5].
pub fn fit_gaussian(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    if points.len() < 4 {
        return Err(FitError::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    if hi - lo < 1e-12 {
        return Err(FitError::Degenerate);
    }
    let d_max = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(1.0);
    // Coarse scan of log(d0), then golden-section refinement around the best
    // cell.
    let (lmin, lmax) = ((d_max * 1e-3).ln(), (d_max * 1e3).ln());
    let steps = 600;
    let at = |i: usize| lmin + (lmax - lmin) * i as f64 / steps as f64;
    let best = (0..=steps)
        .min_by(|&i, &j| {
            profile_sse(points, at(i).exp()).total_cmp(&profile_sse(points, at(j).exp()))
        })
        .unwrap();
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(steps)));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let f = |l: f64| profile_sse(points, l.exp());
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let mut l = (a + b) / 2.0;
    if f(at(best)) < f(l) {
        l = at(best);
    }
    let d0 = l.exp();
    let amplitude = best_amplitude(points, d0);
    Ok(FitResult {
        model: FitModel::Gaussian,
        params: (d0, amplitude),
        residual: gaussian_sse(points, d0, amplitude),
    })
}

/// Ordinary least squares on the four smallest depths.
pub fn fit_linear_first4(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    if points.len() < 4 {
        return Err(FitError::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = &sorted[..4];
    let mx = first.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = first.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let sxx: f64 = first.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let sxy: f64 = first.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = first
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(FitResult {
        model: FitModel::Linear,
        params: (intercept, slope),
        residual,
    })
}

//! Dense state-vector simulation and shot sampling.
//!
//! Qubit 0 is the most significant bit of an amplitude index, matching the
//! two-qubit matrix convention in [`crate::gate`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{validate, Circuit, Instruction, MAX_QUBITS};
use crate::gate::{GateError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("operand {qubit} out of range for {n} qubits")]
    OperandOutOfRange { qubit: usize, n: usize },
    #[error("qubit cap exceeded: {0} > {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("empty measurement list")]
    EmptyMeasurement,
    #[error("shots must be at least 1")]
    NoShots,
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
}

/// A gate with its matrix precomputed.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    One { q: usize, m: [C64; 4] },
    Two { a: usize, b: usize, m: [C64; 16] },
}

impl Op {
    pub fn compile(inst: &Instruction) -> Result<Op, SimError> {
        let u = inst.unitary()?;
        Ok(match inst.operands[..] {
            [q] => Op::One {
                q,
                m: u.entries().try_into().expect("2x2"),
            },
            [a, b] => Op::Two {
                a,
                b,
                m: u.entries().try_into().expect("4x4"),
            },
            _ => unreachable!("arity is 1 or 2"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self, SimError> {
        StateVector::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self, SimError> {
        if n > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, q: usize) -> Result<usize, SimError> {
        if q >= self.n {
            return Err(SimError::OperandOutOfRange { qubit: q, n: self.n });
        }
        Ok(1 << (self.n - 1 - q))
    }

    pub fn apply(&mut self, inst: &Instruction) -> Result<(), SimError> {
        self.apply_op(&Op::compile(inst)?)
    }

    pub fn apply_op(&mut self, op: &Op) -> Result<(), SimError> {
        match op {
            Op::One { q, m } => {
                let mq = self.mask(*q)?;
                self.apply_one(mq, m);
            }
            Op::Two { a, b, m } => {
                let (ma, mb) = (self.mask(*a)?, self.mask(*b)?);
                self.apply_two(ma, mb, m);
            }
        }
        Ok(())
    }

    fn apply_one(&mut self, mq: usize, m: &[C64; 4]) {
        for i in 0..self.amps.len() {
            if i & mq != 0 {
                continue;
            }
            let (x0, x1) = (self.amps[i], self.amps[i | mq]);
            self.amps[i] = m[0] * x0 + m[1] * x1;
            self.amps[i | mq] = m[2] * x0 + m[3] * x1;
        }
    }

    fn apply_two(&mut self, ma: usize, mb: usize, m: &[C64; 16]) {
        for i in 0..self.amps.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let x = idx.map(|j| self.amps[j]);
            for (r, &j) in idx.iter().enumerate() {
                let row = &m[r * 4..r * 4 + 4];
                self.amps[j] = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
            }
        }
    }

    /// Applies a Pauli (1 = X, 2 = Y, 3 = Z) to one qubit, ignoring global phase.
    pub fn apply_pauli(&mut self, q: usize, pauli: usize) {
        let mq = 1 << (self.n - 1 - q);
        let i_unit = C64::new(0.0, 1.0);
        for i in 0..self.amps.len() {
            match pauli {
                1 | 2 if i & mq == 0 => {
                    self.amps.swap(i, i | mq);
                    if pauli == 2 {
                        self.amps[i] *= -i_unit;
                        self.amps[i | mq] *= i_unit;
                    }
                }
                3 if i & mq != 0 => self.amps[i] = -self.amps[i],
                _ => {}
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal distribution over `measured`, with `measured[0]` as the most
    /// significant bit of the outcome index.
    pub fn marginal(&self, measured: &[usize]) -> Result<Vec<f64>, SimError> {
        if measured.is_empty() {
            return Err(SimError::EmptyMeasurement);
        }
        let masks = measured
            .iter()
            .map(|&q| self.mask(q))
            .collect::<Result<Vec<_>, _>>()?;
        let k = measured.len();
        let mut out = vec![0.0; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            out[outcome_index(i, &masks, k)] += p;
        }
        Ok(out)
    }
}

fn outcome_index(i: usize, masks: &[usize], k: usize) -> usize {
    masks
        .iter()
        .enumerate()
        .filter(|(_, &m)| i & m != 0)
        .fold(0, |acc, (j, _)| acc | 1 << (k - 1 - j))
}

/// Functional form of [`StateVector::apply`].
pub fn apply(mut state: StateVector, inst: &Instruction) -> Result<StateVector, SimError> {
    state.apply(inst)?;
    Ok(state)
}

pub(crate) fn initial_index(c: &Circuit) -> usize {
    c.initial_ones
        .iter()
        .fold(0, |acc, &q| acc | 1 << (c.n_qubits - 1 - q))
}

pub(crate) fn check(c: &Circuit) -> Result<(), SimError> {
    validate(c).map_err(|errs| {
        SimError::InvalidCircuit(
            errs.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })
}

/// State after preparing the basis state and applying every instruction.
pub fn run_ideal(c: &Circuit) -> Result<StateVector, SimError> {
    check(c)?;
    let mut state = StateVector::basis(c.n_qubits, initial_index(c))?;
    for inst in &c.instructions {
        state.apply(inst)?;
    }
    Ok(state)
}

/// Bit mask (over outcome indices) of the classically complemented qubits.
pub fn complement_mask(c: &Circuit) -> usize {
    let k = c.measured.len();
    c.measured
        .iter()
        .enumerate()
        .filter(|(_, q)| c.complemented.contains(q))
        .fold(0, |acc, (j, _)| acc | 1 << (k - 1 - j))
}

/// Noiseless distribution of reported outcomes, complements applied.
pub fn outcome_distribution(c: &Circuit) -> Result<Vec<f64>, SimError> {
    let marginal = run_ideal(c)?.marginal(&c.measured)?;
    let mask = complement_mask(c);
    let mut out = vec![0.0; marginal.len()];
    for (i, p) in marginal.into_iter().enumerate() {
        out[i ^ mask] = p;
    }
    Ok(out)
}

/// The reported outcome when the noiseless circuit is deterministic.
pub fn ideal_outcome(c: &Circuit) -> Result<Option<usize>, SimError> {
    let dist = outcome_distribution(c)?;
    Ok(dist.iter().position(|&p| p > 1.0 - 1e-9))
}

pub fn format_outcome(index: usize, width: usize) -> String {
    (0..width)
        .map(|j| {
            if index >> (width - 1 - j) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl Histogram {
    pub fn from_indices(indices: impl IntoIterator<Item = usize>, width: usize) -> Self {
        let mut raw: BTreeMap<usize, u64> = BTreeMap::new();
        let mut shots = 0;
        for i in indices {
            *raw.entry(i).or_default() += 1;
            shots += 1;
        }
        Histogram {
            counts: raw
                .into_iter()
                .map(|(i, n)| (format_outcome(i, width), n))
                .collect(),
            shots,
        }
    }

    pub fn count(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }
}

/// Draws an index from a cumulative distribution.
pub(crate) fn draw(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty");
    let x = u * total;
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
}

pub(crate) fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Multinomial sampling of the measured marginal. Deterministic in `seed`.
pub fn sample(
    state: &StateVector,
    measured: &[usize],
    shots: u64,
    seed: u64,
) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let cdf = cumulative(&state.marginal(measured)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Histogram::from_indices(
        (0..shots).map(|_| draw(&cdf, rng.random::<f64>())),
        measured.len(),
    ))
}

pub fn wald_ci95(p: f64, shots: u64) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    1.96 * (p * (1.0 - p) / shots as f64).sqrt()
}

/// Observed frequency of `ideal` and its Wald 95% half-width.
pub fn success_probability(h: &Histogram, ideal: &str) -> (f64, f64) {
    if h.shots == 0 {
        return (0.0, 0.0);
    }
    let p = h.count(ideal) as f64 / h.shots as f64;
    (p, wald_ci95(p, h.shots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{GateKind, Unitary};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn h_on_most_significant_qubit() {
        let s = apply(StateVector::zero(2).unwrap(), &Instruction::single(GateKind::H, 0)).unwrap();
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        assert!(close(s.amplitudes(), &[r, z, r, z]));
    }

    #[test]
    fn xx_on_zero_state() {
        let s = apply(StateVector::zero(2).unwrap(), &Instruction::xx(0, 1, FRAC_PI_4)).unwrap();
        let z = C64::new(0.0, 0.0);
        assert!(close(
            s.amplitudes(),
            &[C64::new(FRAC_1_SQRT_2, 0.0), z, z, C64::new(0.0, -FRAC_1_SQRT_2)]
        ));
    }

    #[test]
    fn reversed_operands_use_first_as_control() {
        let mut c = Circuit::new(2);
        c.prepare_one(1).cnot(1, 0);
        let s = run_ideal(&c).unwrap();
        assert!((s.probabilities()[0b11] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn run_ideal_examples() {
        let s = run_ideal(&Circuit::new(2)).unwrap();
        assert_eq!(s.probabilities(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            run_ideal(&Circuit::new(16)),
            Err(SimError::InvalidCircuit(_))
        ));
    }

    #[test]
    fn pauli_fast_path_matches_matrices() {
        let mut c = Circuit::new(3);
        c.h(0).t(0).h(1).cnot(1, 2).r(2, 0.7, 0.3);
        let base = run_ideal(&c).unwrap();
        let paulis = [
            Unitary::identity(2),
            crate::gate::pauli(1),
            crate::gate::pauli(2),
            crate::gate::pauli(3),
        ];
        for q in 0..3 {
            for (p, pauli) in paulis.iter().enumerate().skip(1) {
                let mut fast = base.clone();
                fast.apply_pauli(q, p);
                let mut slow = base.clone();
                slow.apply_op(&Op::One {
                    q,
                    m: pauli.entries().try_into().unwrap(),
                })
                .unwrap();
                assert!(close(fast.amplitudes(), slow.amplitudes()));
            }
        }
    }

    #[test]
    fn sample_examples() {
        let zero = StateVector::zero(1).unwrap();
        let h = sample(&zero, &[0], 3000, 1).unwrap();
        assert_eq!(h.count("0"), 3000);
        assert_eq!(h.counts.len(), 1);

        let mut c = Circuit::new(2);
        c.h(0).cnot(0, 1);
        let bell = run_ideal(&c).unwrap();
        let h = sample(&bell, &[0, 1], 1024, 7).unwrap();
        let p = h.count("00") as f64 / 1024.0;
        assert!((p - 0.5).abs() <= wald_ci95(0.5, 1024) * 1.5);
        assert_eq!(h.count("01") + h.count("10"), 0);
        assert_eq!(h, sample(&bell, &[0, 1], 1024, 7).unwrap());

        assert_eq!(sample(&bell, &[], 10, 0), Err(SimError::EmptyMeasurement));
        assert_eq!(sample(&bell, &[0], 0, 0), Err(SimError::NoShots));
    }

    #[test]
    fn success_examples() {
        let mut h = Histogram::default();
        h.counts.insert("0".into(), 3000);
        h.shots = 3000;
        assert_eq!(success_probability(&h, "0"), (1.0, 0.0));

        h.counts.insert("0".into(), 512);
        h.counts.insert("1".into(), 512);
        h.shots = 1024;
        let (p, ci) = success_probability(&h, "0");
        assert_eq!(p, 0.5);
        assert!((ci - 0.0306).abs() < 5e-5);

        let mut h = Histogram::default();
        h.counts.insert("00".into(), 10);
        h.shots = 10;
        assert_eq!(success_probability(&h, "11"), (0.0, 0.0));
    }

    #[test]
    fn marginal_order_and_complement() {
        let mut c = Circuit::new(3);
        c.prepare_one(2).measure(&[2, 0]);
        let dist = outcome_distribution(&c).unwrap();
        assert_eq!(dist, vec![0.0, 0.0, 1.0, 0.0]);
        c.complemented.insert(0);
        assert_eq!(ideal_outcome(&c).unwrap(), Some(0b11));
        assert_eq!(format_outcome(0b011, 3), "011");
    }

    #[test]
    fn draw_boundaries() {
        let cdf = cumulative(&[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(draw(&cdf, 0.0), 1);
        assert_eq!(draw(&cdf, 0.49), 1);
        assert_eq!(draw(&cdf, 0.5), 3);
        assert_eq!(draw(&cdf, 0.999999), 3);
    }
}

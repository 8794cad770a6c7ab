//! Transpiler, router and noisy state-vector simulator for comparing ion-trap
//! and superconducting quantum backends, plus the benchmark harness that
//! drives them.

pub mod bench;
pub mod calibrate;
pub mod circuit;
pub mod config;
pub mod gate;
pub mod noise;
pub mod plot;
pub mod record;
pub mod sim;
pub mod topology;
pub mod transpile;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Gate(#[from] gate::GateError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Transpile(#[from] transpile::TranspileError),
    #[error(transparent)]
    Topology(#[from] topology::TopologyError),
    #[error(transparent)]
    Noise(#[from] noise::NoiseError),
    #[error(transparent)]
    Fit(#[from] bench::FitError),
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Experiment(String),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("records: {0}")]
    Record(String),
    #[error("{0}")]
    Io(String),
}

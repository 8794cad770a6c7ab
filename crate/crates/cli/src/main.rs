use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qarch_core::bench::{
    fit_gaussian, fit_linear_first4, points, sweep, ExperimentKind, ExperimentSpec, FitModel, FitResult,
};
use qarch_core::calibrate::{calibrate_depolarizing, calibrate_linear_regime, search_coherent_sigma};
use qarch_core::config::{Backend, BackendConfig};
use qarch_core::noise::CoherentAxis;
use qarch_core::plot::render_svg;
use qarch_core::record;
use qarch_core::topology::TopologyGraph;
use qarch_core::transpile::Pass;
use qarch_core::Error;

#[derive(Parser)]
#[command(name = "qarch", version, about = "Simulate benchmark circuits on modelled quantum backends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct BackendArgs {
    /// Preset name (ionq, ibm-melbourne, ibm-vigo, rigetti-aspen8).
    #[arg(long, default_value = "ionq")]
    backend: String,
    /// Backend config file; overrides --backend.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated transpiler passes.
    #[arg(long)]
    passes: Option<String>,
    #[arg(long)]
    coherent_sigma: Option<f64>,
    /// `entangling` or a two-letter Pauli product such as `YZ`.
    #[arg(long)]
    coherent_axis: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep an experiment and write one record per grid point.
    Run {
        /// spam, cnot-chain, swap-chain or bv.
        experiment: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Grid as `a..b` (inclusive), `a..b:step` or a comma list.
        #[arg(long)]
        grid: Option<String>,
        /// Hamming weights for bv; same syntax as --grid.
        #[arg(long, conflicts_with = "grid")]
        weights: Option<String>,
        /// Data qubits for bv.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Average each bv weight over this many random hidden strings.
        #[arg(long)]
        random_strings: Option<usize>,
        /// Records file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit a model to a records file.
    Fit {
        records: PathBuf,
        /// gaussian or linear.
        #[arg(long)]
        model: String,
    },
    /// Draw a records file as SVG.
    Plot {
        records: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// Overlay a fitted gaussian or linear curve.
        #[arg(long)]
        fit: Option<String>,
    },
    /// Fit noise parameters and print the resulting backend config.
    Calibrate {
        #[command(flatten)]
        backend: BackendArgs,
        /// Target success lost per SWAP.
        #[arg(long)]
        slope: Option<f64>,
        /// Target swap-chain intercept; needs --slope.
        #[arg(long, requires = "slope")]
        intercept: Option<f64>,
        /// Target 1/e depth of the CNOT chain.
        #[arg(long, conflicts_with = "intercept")]
        d0: Option<f64>,
        /// Keep the closest sigma when --d0 cannot be met.
        #[arg(long)]
        best_effort: bool,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Describe a topology preset or file.
    TopologyInfo { topology: String },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownBackend(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::Usage(format!("bad grid {text:?}"));
    if let Some((a, rest)) = text.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, s)) => (b, s.trim().parse::<u64>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if step == 0 || b < a {
            return Err(bad());
        }
        return Ok((a..=b).step_by(step as usize).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

fn load_backend(args: &BackendArgs) -> Result<Backend, Failure> {
    let mut cfg = match &args.config {
        Some(path) => BackendConfig::load(path)?,
        None => BackendConfig::preset(&args.backend)?,
    };
    if let Some(p) = &args.passes {
        Pass::parse_list(p).map_err(|e| Failure::Usage(e.to_string()))?;
        cfg.passes = p.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(s) = args.coherent_sigma {
        cfg.coherent.sigma = s;
    }
    if let Some(a) = &args.coherent_axis {
        cfg.coherent.axis = a.parse::<CoherentAxis>().map_err(Failure::Usage)?;
    }
    Ok(Backend::from_config(&cfg)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn fit(model: FitModel, pts: &[(f64, f64)]) -> Result<FitResult, Failure> {
    let mut pts = pts.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r = match model {
        FitModel::Gaussian => fit_gaussian(&pts),
        FitModel::Linear => fit_linear_first4(&pts),
    };
    r.map_err(|e| Failure::Runtime(e.to_string()))
}

fn load_records(path: &Path) -> Result<Vec<qarch_core::bench::ExperimentRecord>, Failure> {
    let recs = record::load(path)?;
    if recs.is_empty() {
        return Err(Failure::Runtime(format!("{}: no records", path.display())));
    }
    Ok(recs)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            experiment,
            backend,
            shots,
            seed,
            grid,
            weights,
            n,
            random_strings,
            output,
        } => {
            let kind: ExperimentKind = experiment.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            if weights.is_some() && kind != ExperimentKind::Bv {
                return Err(Failure::Usage("--weights only applies to bv".into()));
            }
            let backend = load_backend(&backend)?;
            let mut spec = ExperimentSpec::new(kind);
            spec.bv_n = n;
            spec.bv_random_strings = random_strings;
            let grid = match grid.or(weights) {
                Some(g) => parse_grid(&g)?,
                None => spec.default_grid(),
            };
            let records = sweep(&spec, &grid, &backend, shots, seed)?;
            let text: String = records.iter().map(|r| record::to_line(r) + "\n").collect();
            write_out(output.as_deref(), &text)
        }
        Command::Fit { records, model } => {
            let model: FitModel = model.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let recs = load_records(&records)?;
            let f = fit(model, &points(&recs))?;
            println!("{}", f.to_json());
            Ok(())
        }
        Command::Plot { records, output, fit: model } => {
            let model = match model {
                Some(m) => Some(m.parse::<FitModel>().map_err(|e| Failure::Usage(e.to_string()))?),
                None => None,
            };
            let recs = record::load(&records)?;
            let curve = match model {
                Some(m) => Some(fit(m, &points(&recs))?),
                None => None,
            };
            let svg = render_svg(&recs, curve.as_ref())?;
            write_out(Some(&output), &svg)
        }
        Command::Calibrate {
            backend,
            slope,
            intercept,
            d0,
            best_effort,
            shots,
            seed,
            output,
        } => {
            if slope.is_none() && d0.is_none() {
                return Err(Failure::Usage("nothing to calibrate: give --slope and/or --d0".into()));
            }
            let mut b = load_backend(&backend)?;
            if let Some(d0) = d0 {
                let s = search_coherent_sigma(&b, d0, shots, seed, 0.02)?;
                eprintln!("sigma = {} (fitted d0 = {:.3})", s.sigma, s.d0);
                if !s.converged {
                    let msg = format!("no sigma reaches d0 = {d0}; closest d0 = {:.3} at sigma = {}", s.d0, s.sigma);
                    if !best_effort {
                        return Err(Failure::Runtime(msg));
                    }
                    eprintln!("warning: {msg}");
                }
                b.coherent.sigma = s.sigma;
            }
            match (slope, intercept) {
                (Some(slope), Some(intercept)) => {
                    let c = calibrate_linear_regime(&b, intercept, slope, shots, seed, 0.01, 0.02)?;
                    eprintln!(
                        "sigma = {}, p2 = {} (intercept {:.4}, slope {:.4})",
                        c.sigma, c.p2, c.intercept, c.slope
                    );
                    b.coherent.sigma = c.sigma;
                    b.depolarizing.p2 = c.p2;
                }
                (Some(slope), None) => {
                    let p2 = calibrate_depolarizing(&b, slope, shots, seed, 0.01)?;
                    eprintln!("p2 = {p2}");
                    b.depolarizing.p2 = p2;
                }
                _ => {}
            }
            write_out(output.as_deref(), &b.to_config().to_toml())
        }
        Command::TopologyInfo { topology } => {
            let g = if TopologyGraph::PRESET_NAMES.contains(&topology.as_str()) {
                TopologyGraph::preset(&topology)
            } else {
                TopologyGraph::load(Path::new(&topology))
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            let edges: Vec<_> = g.edges().collect();
            println!("name {}", g.name());
            println!("qubits {}", g.n());
            println!("edges {}", edges.len());
            println!("max_degree {}", g.max_degree());
            let degrees: Vec<String> = (0..g.n()).map(|q| g.degree(q).to_string()).collect();
            println!("degrees {}", degrees.join(" "));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

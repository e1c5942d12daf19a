//! `ostrovsky`: simulation, invariance statistics, norm profiles and
//! estimate certification for the truncated periodic Ostrovsky flow.
//!
//! Exit codes: 0 pass, 1 usage error, 2 numerical failure, 3 statistical
//! or certification failure, 4 inconclusive.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::manifest::Run;

#[derive(Parser, Debug)]
#[command(name = "ostrovsky", version, about)]
struct Cli {
    /// Root seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per processor). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one state (or an ensemble) and report conservation drift.
    Simulate(SimulateArgs),
    /// Test invariance of the white-noise measure under the flow.
    Invariance(InvarianceArgs),
    /// Gaussian tail of the Besov norm of white noise.
    Tail(TailArgs),
    /// Growth of the sup-in-time Besov norm along the flow.
    Growth(GrowthArgs),
    /// Dyadic profile and norms of a spectrum.
    Norms(NormsArgs),
    /// Certify one of the multiplier/resonance inequalities.
    Verify {
        #[command(subcommand)]
        lemma: Lemma,
    },
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// `white-noise`, `cos` (u = 2cos x) or `file:<path>`.
    #[arg(long, default_value = "white-noise")]
    init: String,
    /// Ensemble size; members go to `ensemble/member-XXXXXX`.
    #[arg(long, default_value_t = 1)]
    members: usize,
    #[arg(long)]
    linear_only: bool,
    /// Largest accepted relative L² drift per unit time; larger drift is
    /// reported as a numerical failure.
    #[arg(long, default_value_t = 1e-8)]
    drift_tolerance: f64,
}

#[derive(Args, Debug, Serialize)]
struct InvarianceArgs {
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
    times: Vec<f64>,
    #[arg(long, default_value_t = 5e-5)]
    dt: f64,
    /// Modes tested by two-sample KS (default: all).
    #[arg(long, value_delimiter = ',')]
    ks_modes: Vec<usize>,
    #[arg(long)]
    linear_only: bool,
}

#[derive(Args, Debug, Serialize)]
struct TailArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = -0.49, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, default_value_t = 2.05)]
    p: f64,
    /// Thresholds K (default: 40 points from the median to the maximum).
    #[arg(long, value_delimiter = ',')]
    k_grid: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct GrowthArgs {
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 1_000)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,10")]
    horizons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.2,0.1,0.05,0.02,0.01")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = -0.49, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, default_value_t = 2.05)]
    p: f64,
    #[arg(long, default_value_t = 5e-5)]
    dt: f64,
}

#[derive(Args, Debug, Serialize)]
struct NormsArgs {
    /// Spectrum file; without it a white-noise sample is profiled.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Cutoff of the generated white-noise sample.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = -0.49, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, default_value_t = 2.05)]
    p: f64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "lemma", rename_all = "kebab-case")]
enum Lemma {
    /// Resonance lower bound `σ ≳ |n n₁ n₂|`.
    Resonance {
        #[arg(long, default_value_t = 128)]
        l: i64,
    },
    /// Weight bound `v(n,τ) ≲ ⟨τ − m(n)⟩^ε`.
    Weight {
        #[arg(long, default_value_t = 32)]
        n_max: i64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Window constant (default 2 for `shifted`, 0.1 for `tight`).
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long, value_enum, default_value_t = WindowArg::Shifted)]
        window: WindowArg,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// `∫⟨τ⟩^{-2α}⟨τ−a⟩^{-2β}dτ ≲ ⟨a⟩^{-γ}`.
    Gtv {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 1e6)]
        a_max: f64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Uniform bound on `Σ⟨n₁⟩^{-l₁}⟨λ + n₁(n−n₁)⟩^{-l₂}`.
    Sum {
        #[arg(long, default_value_t = 1.0)]
        l1: f64,
        #[arg(long, default_value_t = 0.5)]
        l2: f64,
        #[arg(long, default_value_t = 16)]
        n_max: i64,
        #[arg(long, default_value_t = 64.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 2_000)]
        cutoff: i64,
    },
    /// Measure of the near-resonant set and its weighted integral.
    Omega {
        #[arg(long, default_value_t = 64)]
        n_max: i64,
        #[arg(long, default_value_t = 4)]
        m_min_exp: u32,
        #[arg(long, default_value_t = 20)]
        m_max_exp: u32,
        #[arg(long, default_value_t = 0.1)]
        c0: f64,
        #[arg(long, default_value_t = 0.95)]
        zeta: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WindowArg {
    Shifted,
    Tight,
}

/// Outcome of a command, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Usage,
    Numerical,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Usage => 1,
            Status::Numerical => 2,
            Status::Fail => 3,
            Status::Inconclusive => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Usage => "usage-error",
            Status::Numerical => "numerical-failure",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage.code() } else { 0 });
        }
    };
    let threads = if cli.jobs == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cli.jobs
    };
    // Only the first call in a process can install the pool; later calls
    // (none in the binary) would keep the existing one.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    let (name, params) = match &cli.command {
        Command::Simulate(a) => ("simulate", serde_json::to_value(a)),
        Command::Invariance(a) => ("invariance", serde_json::to_value(a)),
        Command::Tail(a) => ("tail", serde_json::to_value(a)),
        Command::Growth(a) => ("growth", serde_json::to_value(a)),
        Command::Norms(a) => ("norms", serde_json::to_value(a)),
        Command::Verify { lemma } => ("verify", serde_json::to_value(lemma)),
    };
    let mut params = params.expect("arguments serialise");
    if let Some(map) = params.as_object_mut() {
        map.insert("jobs".into(), threads.into());
    }
    let mut run = match Run::start(&cli.out, name, params, cli.seed) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(Status::Numerical.code());
        }
    };

    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(&mut run, a),
        Command::Invariance(a) => commands::invariance(&mut run, a),
        Command::Tail(a) => commands::tail(&mut run, a),
        Command::Growth(a) => commands::growth(&mut run, a),
        Command::Norms(a) => commands::norms(&mut run, a),
        Command::Verify { lemma } => commands::verify(&mut run, lemma),
    };
    let status = match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::classify(&e)
        }
    };
    if let Err(e) = run.finish(status) {
        eprintln!("error: could not write manifest: {e:#}");
        return ExitCode::from(Status::Numerical.code());
    }
    ExitCode::from(status.code())
}

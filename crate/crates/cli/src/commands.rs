use anyhow::{bail, Result};
use ostrovsky::estimates::weight::{weight_bound_check, Window, WeightParams, WeightScan, DEFAULT_SHIFTED_C0};
use ostrovsky::estimates::{gtv, multiplier, omega, resonance, EstimateReport, DEFAULT_C0};
use ostrovsky::integrator::{drift, evolve, Nonlinearity, SimConfig};
use ostrovsky::io::{config_json, format_real, format_spectrum, read_modes, snapshot_name};
use ostrovsky::measure::{
    growth_test, invariance_test, member_seed, sample_white_noise, tail_test, GrowthConfig,
    InvarianceConfig, TailConfig, Verdict,
};
use ostrovsky::norms::{besov_l1, besov_sup, dyadic_profile, sobolev_norm};
use ostrovsky::{Error, Rational, State, Trajectory};
use rayon::prelude::*;

use crate::manifest::Run;
use crate::{GrowthArgs, InvarianceArgs, Lemma, NormsArgs, SimulateArgs, Status, TailArgs, WindowArg};

/// Exit status for an error that escaped a command.
pub fn classify(e: &anyhow::Error) -> Status {
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidParameter(_)
            | Error::Hypothesis(_)
            | Error::InvalidCutoff { .. }
            | Error::ZeroFrequency(_)
            | Error::Parse { .. }
            | Error::ShapeMismatch { .. }
            | Error::CutoffTooLarge { .. }
            | Error::GridTooSmall { .. },
        ) => Status::Usage,
        _ if e.downcast_ref::<UsageError>().is_some() => Status::Usage,
        _ => Status::Numerical,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn from_verdict(v: Verdict) -> Status {
    match v {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

fn nonlinearity(linear_only: bool) -> Nonlinearity {
    if linear_only {
        Nonlinearity::Off
    } else {
        Nonlinearity::On
    }
}

fn initial_state(init: &str, cutoff: usize, seed: u64) -> Result<State> {
    Ok(match init {
        "white-noise" => sample_white_noise(cutoff, seed)?,
        // u = 2cos x
        "cos" => State::single_mode(cutoff, 1, num_complex::Complex::new(1.0, 0.0))?,
        other => match other.strip_prefix("file:") {
            Some(path) => State::from_modes(read_modes(path.as_ref())?)?,
            None => return Err(usage(format!("unknown --init '{other}'"))),
        },
    })
}

fn write_trajectory(run: &mut Run, dir: &str, traj: &Trajectory) -> Result<()> {
    run.write(format!("{dir}/config.json"), &config_json(&traj.config))?;
    for (t, state) in traj.times.iter().zip(&traj.snapshots) {
        run.write(format!("{dir}/{}", snapshot_name(*t)), &format_spectrum(state.modes()))?;
    }
    Ok(())
}

pub fn simulate(run: &mut Run, a: &SimulateArgs) -> Result<Status> {
    if a.members == 0 {
        return Err(usage("--members must be at least 1"));
    }
    if a.members > 1 && a.init != "white-noise" {
        return Err(usage("ensembles (--members > 1) need --init white-noise"));
    }
    let seeds: Vec<u64> = (0..a.members as u64).map(|i| member_seed(run.seed(), i)).collect();
    let initial = seeds
        .iter()
        .map(|&s| initial_state(&a.init, a.n, s))
        .collect::<Result<Vec<_>>>()?;
    let mut config = SimConfig::new(initial[0].cutoff(), a.dt, a.t);
    config.snapshot_stride = a.stride;
    config.seed = run.seed();
    config.nonlinearity = nonlinearity(a.linear_only);
    config.validate()?;

    let results: Vec<_> = initial.par_iter().map(|u0| evolve(u0, &config)).collect();
    let mut failed = 0;
    let mut drifting = 0;
    let mut first_error = None;
    let allowed = a.drift_tolerance * a.t.max(1.0);
    println!("member,l2_drift,hamiltonian_drift,mean,final_time");
    for (i, r) in results.iter().enumerate() {
        let dir = if a.members == 1 {
            "trajectory".to_string()
        } else {
            format!("ensemble/member-{i:06}")
        };
        let traj = match r {
            Ok(traj) => traj,
            Err(failure) => {
                failed += 1;
                eprintln!("member {i}: {}", failure.error);
                if !failure.partial.snapshots.is_empty() {
                    write_trajectory(run, &dir, &failure.partial)?;
                }
                first_error.get_or_insert_with(|| failure.error.clone());
                continue;
            }
        };
        write_trajectory(run, &dir, traj)?;
        let d = drift(traj);
        if !(d.l2 <= allowed) {
            drifting += 1;
        }
        println!(
            "{i},{},{},{},{}",
            format_real(d.l2),
            format_real(d.hamiltonian),
            format_real(d.mean),
            traj.times.last().copied().unwrap_or(0.0)
        );
    }
    run.record_failures("blow_up_or_unstable", failed);
    run.record_failures("drift_above_tolerance", drifting);
    if let Some(e) = first_error {
        eprintln!("{failed} of {} members failed; first error: {e}", a.members);
        return Ok(match e {
            Error::BlowUp { .. } | Error::Cfl { .. } | Error::NonFinite(_) => Status::Numerical,
            _ => Status::Usage,
        });
    }
    if drifting > 0 {
        eprintln!(
            "{drifting} of {} members exceed the L2 drift tolerance {allowed:e}",
            a.members
        );
        return Ok(Status::Numerical);
    }
    Ok(Status::Pass)
}

pub fn invariance(run: &mut Run, a: &InvarianceArgs) -> Result<Status> {
    let mut cfg = InvarianceConfig::new(a.n, a.samples, a.times.clone(), run.seed());
    cfg.dt = a.dt;
    cfg.nonlinearity = nonlinearity(a.linear_only);
    if !a.ks_modes.is_empty() {
        cfg.ks_modes = a.ks_modes.clone();
    }
    let report = invariance_test(&cfg)?;
    run.write("invariance.csv", &report.to_csv())?;
    let summary = report.summary();
    run.write("summary.txt", &summary)?;
    print!("{summary}");
    run.record_failures("excluded_members", report.failures.len());
    Ok(from_verdict(report.verdict))
}

pub fn tail(run: &mut Run, a: &TailArgs) -> Result<Status> {
    let mut cfg = TailConfig::new(a.n, a.samples, run.seed());
    cfg.s = a.s;
    cfg.p = a.p;
    if !a.k_grid.is_empty() {
        cfg.k_grid = Some(a.k_grid.clone());
    }
    let report = tail_test(&cfg)?;
    run.write("tail.csv", &report.to_csv())?;
    let summary = report.summary();
    run.write("summary.txt", &summary)?;
    print!("{summary}");
    Ok(from_verdict(report.verdict))
}

pub fn growth(run: &mut Run, a: &GrowthArgs) -> Result<Status> {
    let mut cfg = GrowthConfig::new(a.n, a.samples, a.horizons.clone(), run.seed());
    cfg.eps = a.eps.clone();
    cfg.s = a.s;
    cfg.p = a.p;
    cfg.dt = a.dt;
    let report = growth_test(&cfg)?;
    run.write("growth.csv", &report.to_csv())?;
    let summary = report.summary();
    run.write("summary.txt", &summary)?;
    print!("{summary}");
    run.record_failures("excluded_members", report.failures.len());
    Ok(from_verdict(report.verdict))
}

pub fn norms(run: &mut Run, a: &NormsArgs) -> Result<Status> {
    let modes = match &a.input {
        Some(path) => read_modes::<f64>(path)?,
        None => sample_white_noise::<f64>(a.n, member_seed(run.seed(), 0))?.into_modes(),
    };
    let profile = dyadic_profile(&modes, a.s, a.p)?;
    run.write("profile.csv", &profile.to_csv())?;
    let rows = [
        ("sobolev", sobolev_norm(&modes, a.s)),
        ("besov_sup", besov_sup(&modes, a.s, a.p)?),
        ("besov_l1", besov_l1(&modes, a.s, a.p)?),
    ];
    let mut csv = String::from("norm,value\n");
    for (name, value) in rows {
        csv.push_str(&format!("{name},{}\n", format_real(value)));
    }
    run.write("norms.csv", &csv)?;
    print!("{csv}");
    Ok(Status::Pass)
}

fn finish_report(run: &mut Run, report: &EstimateReport) -> Result<Status> {
    run.write(format!("{}.csv", report.lemma), &report.to_csv())?;
    println!("{}", report.verdict_line());
    Ok(if report.pass { Status::Pass } else { Status::Fail })
}

pub fn verify(run: &mut Run, lemma: &Lemma) -> Result<Status> {
    match *lemma {
        Lemma::Resonance { l } => {
            let report = resonance::resonance_min_ratio::<Rational>(l)?;
            finish_report(run, &report)
        }
        Lemma::Weight {
            n_max,
            delta,
            c0,
            window,
            epsilon,
        } => {
            let (window, default_c0) = match window {
                WindowArg::Shifted => (Window::Shifted, DEFAULT_SHIFTED_C0),
                WindowArg::Tight => (Window::Tight, DEFAULT_C0),
            };
            if n_max < 1 {
                return Err(usage("--n-max must be at least 1"));
            }
            let params = WeightParams {
                delta,
                c0: c0.unwrap_or(default_c0),
                window,
            };
            let mut grid = WeightScan::new(n_max);
            grid.epsilon = epsilon;
            finish_report(run, &weight_bound_check(&grid, &params)?)
        }
        Lemma::Gtv {
            alpha,
            beta,
            a_max,
            epsilon,
        } => {
            if !(a_max > 0.01) {
                return Err(usage("--a-max must exceed 0.01"));
            }
            let report = gtv::gtv_bound_check(alpha, beta, &gtv::default_a_grid(a_max), epsilon)?;
            finish_report(run, &report)
        }
        Lemma::Sum {
            l1,
            l2,
            n_max,
            lambda_max,
            cutoff,
        } => {
            if n_max < 1 || !(lambda_max >= 0.0) || cutoff < 1 {
                return Err(usage("need --n-max >= 1, --lambda-max >= 0, --cutoff >= 1"));
            }
            let mut grid = multiplier::SupSearch::new(n_max, lambda_max);
            grid.cutoff = cutoff;
            finish_report(run, &multiplier::multiplier_sup_search(l1, l2, &grid)?)
        }
        Lemma::Omega {
            n_max,
            m_min_exp,
            m_max_exp,
            c0,
            zeta,
        } => {
            if n_max < 1 || m_min_exp > m_max_exp {
                bail!(usage("need --n-max >= 1 and --m-min-exp <= --m-max-exp"));
            }
            let measure = omega::resonance_set_scan(n_max, m_min_exp..=m_max_exp, c0)?;
            let integral = omega::resonance_weight_scan(n_max, zeta, c0)?;
            let a = finish_report(run, &measure)?;
            let b = finish_report(run, &integral)?;
            Ok(if a == Status::Pass && b == Status::Pass {
                Status::Pass
            } else {
                Status::Fail
            })
        }
    }
}

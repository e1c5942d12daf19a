//! The finite-dimensional white-noise measure
//! `dQ_N ∝ exp(-½ Σ_{n=1}^N |a_n|²) Π da_n` and Monte-Carlo tests of its
//! invariance, tail and growth behaviour under the truncated flow.
//!
//! Samples are `a_n = g_n` with `g_n` i.i.d. standard complex Gaussians of
//! density `(1/2π) e^{-|z|²/2}`: independent real and imaginary parts of
//! variance 1, so `E|a_n|² = 2`.

use std::cell::Cell;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{cfl_bound, Nonlinearity, SimConfig, Stepper};
use crate::norms::besov_sup;
use crate::scalar::Real;
use crate::spectral::SpectralState;
use crate::stats::{
    chi_squared_cdf, fit_line, fit_quadratic, ks_one_sample, ks_two_sample, mean_and_se,
    quantile_sorted, LineFit,
};

/// Fraction of blown-up members above which a report is inconclusive.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;
/// Width of the moment acceptance band in Monte-Carlo standard errors.
pub const MOMENT_BAND: f64 = 3.0;
/// Family-wise significance of the KS tests (Bonferroni-split).
pub const KS_LEVEL: f64 = 0.01;
/// Step for ensemble runs. At `N = 32` a step of `1e-4` inflates the top
/// second moments by several Monte-Carlo standard errors at `M = 10⁴`;
/// `5e-5` brings the bias below a quarter of one.
pub const DEFAULT_ENSEMBLE_DT: f64 = 5e-5;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of ensemble member `index`: output `index` of the SplitMix64 stream
/// started at `seed`. Pairwise distinct for distinct indices.
pub fn member_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// One draw from `Q_N`.
pub fn sample_white_noise<T: Real>(cutoff: usize, seed: u64) -> Result<SpectralState<T>> {
    if cutoff == 0 {
        return Err(Error::InvalidCutoff { got: 0, min: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = (0..cutoff)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    SpectralState::from_modes(modes)
}

/// Unnormalised log-density `-½ Σ_{n=1}^N |a_n|²`.
pub fn log_density<T: Real>(state: &SpectralState<T>) -> T {
    -T::lit(0.5) * state.energy()
}

/// Seeded collection of initial states.
#[derive(Debug, Clone)]
pub struct Ensemble<T> {
    pub config: SimConfig,
    pub members: Vec<SpectralState<T>>,
    pub member_seeds: Vec<u64>,
    /// Indices of members whose evolution failed.
    pub failures: Vec<usize>,
}

impl<T: Real> Ensemble<T> {
    /// Members `offset..offset + size` of the stream rooted at `config.seed`.
    pub fn draw(config: &SimConfig, offset: usize, size: usize) -> Result<Self> {
        let member_seeds: Vec<u64> = (offset..offset + size)
            .map(|i| member_seed(config.seed, i as u64))
            .collect();
        let members = member_seeds
            .par_iter()
            .map(|&s| sample_white_noise(config.cutoff, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            members,
            member_seeds,
            failures: vec![],
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Time step used for one member: the configured step, reduced to the
/// member's CFL bound when that is smaller.
pub fn member_dt<T: Real>(state: &SpectralState<T>, dt: f64, nonlinearity: Nonlinearity) -> f64 {
    match nonlinearity {
        Nonlinearity::Off => dt,
        Nonlinearity::On => dt.min(cfl_bound(state).as_f64()),
    }
}

/// Evolves every member to `stops`; `Err(time)` marks a blow-up.
pub fn evolve_members<T: Real>(
    members: &[SpectralState<T>],
    stops: &[f64],
    dt: f64,
    nonlinearity: Nonlinearity,
) -> Vec<std::result::Result<Vec<SpectralState<T>>, f64>> {
    let cutoff = members.first().map_or(1, |m| m.cutoff());
    let stops_t: Vec<T> = stops.iter().map(|&t| T::lit(t)).collect();
    members
        .par_iter()
        .map_init(
            || Stepper::new(cutoff, nonlinearity),
            |stepper, u0| {
                let h = T::lit(member_dt(u0, dt, nonlinearity));
                stepper
                    .integrate(u0, &stops_t, h, None)
                    .map_err(|e| match e {
                        Error::BlowUp { time } => time,
                        _ => f64::NAN,
                    })
            },
        )
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// One statistical check.
#[derive(Debug, Clone, PartialEq)]
pub struct TestRow {
    pub observable: &'static str,
    pub mode: Option<usize>,
    pub time: f64,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub standard_error: Option<f64>,
    /// Acceptance threshold: band half-width for moments, per-test level for KS.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct InvarianceConfig {
    pub cutoff: usize,
    pub samples: usize,
    pub times: Vec<f64>,
    pub seed: u64,
    pub dt: f64,
    pub nonlinearity: Nonlinearity,
    /// Modes whose real and imaginary parts get a two-sample KS test.
    pub ks_modes: Vec<usize>,
}

impl InvarianceConfig {
    pub fn new(cutoff: usize, samples: usize, times: Vec<f64>, seed: u64) -> Self {
        Self {
            cutoff,
            samples,
            times,
            seed,
            dt: DEFAULT_ENSEMBLE_DT,
            nonlinearity: Nonlinearity::On,
            ks_modes: (1..=cutoff).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub observable: String,
    pub requested: usize,
    /// Members left after excluding failures.
    pub used: usize,
    pub failures: Vec<usize>,
    pub times: Vec<f64>,
    pub rows: Vec<TestRow>,
    pub verdict: Verdict,
}

impl InvarianceReport {
    pub fn failure_fraction(&self) -> f64 {
        self.failures.len() as f64 / self.requested as f64
    }

    pub fn rows_for(&self, observable: &str) -> impl Iterator<Item = &TestRow> {
        let name = observable.to_owned();
        self.rows.iter().filter(move |r| r.observable == name)
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn summary(&self) -> String {
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        let mut out = format!(
            "invariance: {} samples requested, {} used, {} excluded ({:.2}%)\n",
            self.requested,
            self.used,
            self.failures.len(),
            100.0 * self.failure_fraction()
        );
        for name in ["second_moment", "ks_re", "ks_im", "chi2_energy"] {
            let rows: Vec<_> = self.rows_for(name).collect();
            if rows.is_empty() {
                continue;
            }
            let bad = rows.iter().filter(|r| !r.pass).count();
            out.push_str(&format!("  {name:<14} {} tests, {bad} failed\n", rows.len()));
        }
        out.push_str(&format!(
            "verdict: {} ({failed} of {} checks failed)\n",
            self.verdict.as_str(),
            self.rows.len()
        ));
        out
    }
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn rows_to_csv(rows: &[TestRow]) -> String {
    let mut out =
        String::from("observable,mode,time,statistic,p_value,standard_error,threshold,pass\n");
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.observable,
            r.mode.map(|m| m.to_string()).unwrap_or_default(),
            fmt_f64(r.time),
            fmt_f64(r.statistic),
            opt(r.p_value),
            opt(r.standard_error),
            fmt_f64(r.threshold),
            r.pass
        ));
    }
    out
}

/// Draws `M` members, evolves them to every requested time and compares
/// each time slice with `M` fresh draws from `Q_N`:
///
/// * per-mode second moments against `E|a_n|² = 2` within
///   [`MOMENT_BAND`] standard errors;
/// * two-sample KS on `Re a_n`, `Im a_n` against the fresh draws;
/// * one-sample KS of `Σ|a_n|²` against `χ²_{2N}`.
///
/// KS tests share the level [`KS_LEVEL`] by Bonferroni correction.
pub fn invariance_test(cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    if cfg.samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "sample count {} below 100",
            cfg.samples
        )));
    }
    if cfg.times.is_empty() {
        return Err(Error::InvalidParameter("no times requested".into()));
    }
    if cfg.ks_modes.iter().any(|&n| n == 0 || n > cfg.cutoff) {
        return Err(Error::InvalidParameter("KS mode outside 1..=N".into()));
    }
    let mut times = cfg.times.clone();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut sim = SimConfig::new(cfg.cutoff, cfg.dt, *times.last().expect("nonempty"));
    sim.seed = cfg.seed;
    sim.nonlinearity = cfg.nonlinearity;
    sim.validate()?;

    let mut ensemble = Ensemble::<f64>::draw(&sim, 0, cfg.samples)?;
    let fresh = Ensemble::<f64>::draw(&sim, cfg.samples, cfg.samples)?;
    let outcomes = evolve_members(&ensemble.members, &times, cfg.dt, cfg.nonlinearity);

    let mut survivors: Vec<&Vec<SpectralState<f64>>> = Vec::with_capacity(outcomes.len());
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Ok(states) => survivors.push(states),
            Err(_) => ensemble.failures.push(i),
        }
    }
    let used = survivors.len();
    let requested = cfg.samples;
    let mut report = InvarianceReport {
        observable: "white-noise law of (a_1..a_N)".into(),
        requested,
        used,
        failures: ensemble.failures.clone(),
        times: times.clone(),
        rows: vec![],
        verdict: Verdict::Inconclusive,
    };
    if (used as f64) < (1.0 - MAX_FAILURE_FRACTION) * requested as f64 || used < 2 {
        return Ok(report);
    }

    let ks_count = times.len() * (2 * cfg.ks_modes.len() + 1);
    let ks_threshold = KS_LEVEL / ks_count as f64;
    let fresh_part = |n: usize, imag: bool| -> Vec<f64> {
        fresh
            .members
            .iter()
            .map(|s| {
                let a = s.modes()[n - 1];
                if imag {
                    a.im
                } else {
                    a.re
                }
            })
            .collect()
    };
    let chi2 = chi_squared_cdf(2.0 * cfg.cutoff as f64);

    for (ti, &t) in times.iter().enumerate() {
        let slice: Vec<&SpectralState<f64>> = survivors.iter().map(|s| &s[ti]).collect();
        for n in 1..=cfg.cutoff {
            let sq: Vec<f64> = slice.iter().map(|s| s.modes()[n - 1].norm_sqr()).collect();
            let (mean, se) = mean_and_se(&sq);
            report.rows.push(TestRow {
                observable: "second_moment",
                mode: Some(n),
                time: t,
                statistic: mean,
                p_value: None,
                standard_error: Some(se),
                threshold: MOMENT_BAND * se,
                pass: (mean - 2.0).abs() <= MOMENT_BAND * se,
            });
        }
        for &n in &cfg.ks_modes {
            for (name, imag) in [("ks_re", false), ("ks_im", true)] {
                let xs: Vec<f64> = slice
                    .iter()
                    .map(|s| {
                        let a = s.modes()[n - 1];
                        if imag {
                            a.im
                        } else {
                            a.re
                        }
                    })
                    .collect();
                let ks = ks_two_sample(&xs, &fresh_part(n, imag))?;
                report.rows.push(TestRow {
                    observable: name,
                    mode: Some(n),
                    time: t,
                    statistic: ks.statistic,
                    p_value: Some(ks.p_value),
                    standard_error: None,
                    threshold: ks_threshold,
                    pass: ks.p_value >= ks_threshold,
                });
            }
        }
        let energies: Vec<f64> = slice.iter().map(|s| s.energy()).collect();
        let ks = ks_one_sample(&energies, &chi2)?;
        report.rows.push(TestRow {
            observable: "chi2_energy",
            mode: None,
            time: t,
            statistic: ks.statistic,
            p_value: Some(ks.p_value),
            standard_error: None,
            threshold: ks_threshold,
            pass: ks.p_value >= ks_threshold,
        });
    }
    report.verdict = if report.rows.iter().all(|r| r.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TailConfig {
    pub cutoff: usize,
    pub samples: usize,
    pub s: f64,
    pub p: f64,
    /// Thresholds `K`; `None` spreads 40 points from the sample median to the
    /// sample maximum.
    pub k_grid: Option<Vec<f64>>,
    pub seed: u64,
}

impl TailConfig {
    pub fn new(cutoff: usize, samples: usize, seed: u64) -> Self {
        Self {
            cutoff,
            samples,
            s: -0.49,
            p: 2.05,
            k_grid: None,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TailPoint {
    pub k: f64,
    pub exceedance: f64,
    pub used_in_fit: bool,
}

#[derive(Debug, Clone)]
pub struct TailReport {
    pub samples: usize,
    pub median: f64,
    pub points: Vec<TailPoint>,
    /// Fit of `ln P` against `K²` over the usable points.
    pub fit: Option<LineFit>,
    /// Fitted `c = -slope`.
    pub c: Option<f64>,
    pub degenerate: bool,
    pub verdict: Verdict,
}

/// Minimum coefficient of determination for the tail fit.
pub const TAIL_MIN_R2: f64 = 0.95;

impl TailReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,exceedance,used_in_fit\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(p.k),
                fmt_f64(p.exceedance),
                p.used_in_fit
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let usable = self.points.iter().filter(|p| p.used_in_fit).count();
        let mut out = format!(
            "tail: {} samples, median norm {:.6}, {usable} usable grid points\n",
            self.samples, self.median
        );
        if let (Some(fit), Some(c)) = (self.fit, self.c) {
            out.push_str(&format!(
                "  ln P ≈ {:.6} - {:.6} K²   (R² = {:.5})\n",
                fit.intercept, c, fit.r_squared
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict.as_str()));
        out
    }
}

/// `b̂^s_{p,∞}` norms of `M` independent draws (seeds `0..M` of the stream).
pub fn sample_norms(cutoff: usize, samples: usize, s: f64, p: f64, seed: u64) -> Result<Vec<f64>> {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = sample_white_noise::<f64>(cutoff, member_seed(seed, i))?;
            besov_sup(u.modes(), s, p)
        })
        .collect()
}

/// Empirical exceedance `P(‖u‖ > K)` over a grid and a least-squares fit of
/// `ln P` against `K²` on the points with `K ≥ median` and `P ≥ 10/M`.
pub fn tail_test(cfg: &TailConfig) -> Result<TailReport> {
    if cfg.samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "tail test needs at least 10^4 samples, got {}",
            cfg.samples
        )));
    }
    let mut norms = sample_norms(cfg.cutoff, cfg.samples, cfg.s, cfg.p, cfg.seed)?;
    norms.sort_by(f64::total_cmp);
    let m = norms.len();
    let median = quantile_sorted(&norms, 0.5);
    let grid = match &cfg.k_grid {
        Some(g) => {
            let mut g = g.clone();
            g.sort_by(f64::total_cmp);
            g
        }
        None => {
            let hi = norms[m - 1];
            (0..40).map(|i| median + (hi - median) * i as f64 / 39.0).collect()
        }
    };
    let floor = 10.0 / m as f64;
    let points: Vec<TailPoint> = grid
        .iter()
        .map(|&k| {
            let above = m - norms.partition_point(|&x| x <= k);
            let exceedance = above as f64 / m as f64;
            TailPoint {
                k,
                exceedance,
                used_in_fit: k >= median && exceedance >= floor,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.used_in_fit)
        .map(|p| (p.k * p.k, p.exceedance.ln()))
        .unzip();
    let degenerate = xs.len() < 3;
    let fit = if degenerate { None } else { Some(fit_line(&xs, &ys)?) };
    let c = fit.map(|f| -f.slope);
    let verdict = match (degenerate, fit) {
        (true, _) => Verdict::Inconclusive,
        (false, Some(f)) if -f.slope > 0.0 && f.r_squared > TAIL_MIN_R2 => Verdict::Pass,
        _ => Verdict::Fail,
    };
    Ok(TailReport {
        samples: m,
        median,
        points,
        fit,
        c,
        degenerate,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct GrowthConfig {
    pub cutoff: usize,
    pub samples: usize,
    pub horizons: Vec<f64>,
    pub eps: Vec<f64>,
    pub s: f64,
    pub p: f64,
    pub dt: f64,
    pub seed: u64,
}

impl GrowthConfig {
    pub fn new(cutoff: usize, samples: usize, horizons: Vec<f64>, seed: u64) -> Self {
        Self {
            cutoff,
            samples,
            horizons,
            eps: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
            s: -0.49,
            p: 2.05,
            dt: DEFAULT_ENSEMBLE_DT,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthPoint {
    pub horizon: f64,
    pub eps: f64,
    /// `(1-ε)`-quantile over members of `sup_{t≤T} ‖u(t)‖`.
    pub quantile: f64,
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub requested: usize,
    pub used: usize,
    pub failures: Vec<usize>,
    pub points: Vec<GrowthPoint>,
    /// Fit of `quantile²` against `ln(T/ε)`.
    pub fit: LineFit,
    /// Quadratic coefficient of the same data and its standard error.
    pub curvature: (f64, f64),
    /// For each ε: `q²(T_max) - q²(T_min)` and the linear allowance
    /// `slope·ln(T_max/T_min) + 3·residual_sd`.
    pub horizon_increments: Vec<(f64, f64, f64)>,
    pub monotone: bool,
    pub verdict: Verdict,
}

impl GrowthReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,eps,log_T_over_eps,quantile,quantile_sq\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(p.horizon),
                fmt_f64(p.eps),
                fmt_f64((p.horizon / p.eps).ln()),
                fmt_f64(p.quantile),
                fmt_f64(p.quantile * p.quantile)
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "growth: {} members requested, {} used, {} excluded\n  q² ≈ {:.6} + {:.6} ln(T/ε)   (R² = {:.4}); curvature {:.3e} ± {:.3e}\n",
            self.requested,
            self.used,
            self.failures.len(),
            self.fit.intercept,
            self.fit.slope,
            self.fit.r_squared,
            self.curvature.0,
            self.curvature.1
        );
        for (eps, inc, allow) in &self.horizon_increments {
            out.push_str(&format!(
                "  ε = {eps}: Δq² over horizons = {inc:.6}, linear allowance {allow:.6}\n"
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict.as_str()));
        out
    }
}

/// Quantiles of `sup_{t≤T} ‖u^N(t)‖_{b̂^s_{p,∞}}` over `(T, ε)` and their
/// growth in `ln(T/ε)`.
pub fn growth_test(cfg: &GrowthConfig) -> Result<GrowthReport> {
    if cfg.samples < 2 || cfg.horizons.is_empty() || cfg.eps.is_empty() {
        return Err(Error::InvalidParameter(
            "growth test needs samples, horizons and ε values".into(),
        ));
    }
    if cfg.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::InvalidParameter("ε must lie in (0, 1]".into()));
    }
    let mut horizons = cfg.horizons.clone();
    horizons.sort_by(f64::total_cmp);
    horizons.dedup();
    if horizons[0] <= 0.0 {
        return Err(Error::InvalidParameter("horizons must be positive".into()));
    }
    let mut sim = SimConfig::new(cfg.cutoff, cfg.dt, *horizons.last().expect("nonempty"));
    sim.seed = cfg.seed;
    sim.validate()?;
    let ensemble = Ensemble::<f64>::draw(&sim, 0, cfg.samples)?;

    let (s, p) = (cfg.s, cfg.p);
    let outcomes: Vec<std::result::Result<Vec<f64>, ()>> = ensemble
        .members
        .par_iter()
        .map_init(
            || Stepper::new(cfg.cutoff, Nonlinearity::On),
            |stepper, u0| {
                let h = member_dt(u0, cfg.dt, Nonlinearity::On);
                let running = Cell::new(besov_sup(u0.modes(), s, p).unwrap_or(f64::NAN));
                let mut sups = Vec::with_capacity(horizons.len());
                let mut observe = |_t: f64, u: &SpectralState<f64>| {
                    if let Ok(v) = besov_sup(u.modes(), s, p) {
                        running.set(running.get().max(v));
                    }
                };
                // stop at each horizon to read off the running supremum
                let mut state = u0.clone();
                let mut t0 = 0.0;
                for &t in &horizons {
                    let out = stepper
                        .integrate(&state, &[t - t0], h, Some(&mut observe))
                        .map_err(|_| ())?;
                    state = out.into_iter().next().expect("one stop");
                    t0 = t;
                    sups.push(running.get());
                }
                Ok(sups)
            },
        )
        .collect();

    let mut failures = vec![];
    let mut per_horizon: Vec<Vec<f64>> = vec![vec![]; horizons.len()];
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(sups) => sups
                .into_iter()
                .enumerate()
                .for_each(|(k, v)| per_horizon[k].push(v)),
            Err(()) => failures.push(i),
        }
    }
    let used = cfg.samples - failures.len();
    let mut eps = cfg.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();

    let mut points = vec![];
    for (k, &t) in horizons.iter().enumerate() {
        per_horizon[k].sort_by(f64::total_cmp);
        for &e in &eps {
            let quantile = if per_horizon[k].is_empty() {
                f64::NAN
            } else {
                quantile_sorted(&per_horizon[k], 1.0 - e)
            };
            points.push(GrowthPoint {
                horizon: t,
                eps: e,
                quantile,
            });
        }
    }
    let monotone = horizons.iter().all(|&t| {
        let qs: Vec<f64> = points.iter().filter(|p| p.horizon == t).map(|p| p.quantile).collect();
        qs.windows(2).all(|w| w[1] >= w[0])
    }) && eps.iter().all(|&e| {
        let qs: Vec<f64> = points.iter().filter(|p| p.eps == e).map(|p| p.quantile).collect();
        qs.windows(2).all(|w| w[1] >= w[0])
    });

    let xs: Vec<f64> = points.iter().map(|p| (p.horizon / p.eps).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.quantile * p.quantile).collect();
    let fit = fit_line(&xs, &ys)?;
    let curvature = fit_quadratic(&xs, &ys)
        .map(|(c, se)| (c[2], se))
        .unwrap_or((f64::NAN, f64::NAN));
    let (t_min, t_max) = (horizons[0], *horizons.last().expect("nonempty"));
    let allowance = fit.slope * (t_max / t_min).ln() + 3.0 * fit.residual_sd;
    let horizon_increments: Vec<(f64, f64, f64)> = eps
        .iter()
        .map(|&e| {
            let q = |t: f64| {
                points
                    .iter()
                    .find(|p| p.horizon == t && p.eps == e)
                    .map(|p| p.quantile * p.quantile)
                    .expect("grid point")
            };
            (e, q(t_max) - q(t_min), allowance)
        })
        .collect();

    let verdict = if (used as f64) < (1.0 - MAX_FAILURE_FRACTION) * cfg.samples as f64 {
        Verdict::Inconclusive
    } else if monotone
        && fit.slope > 0.0
        && horizon_increments.iter().all(|&(_, inc, allow)| inc <= allow)
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(GrowthReport {
        requested: cfg.samples,
        used,
        failures,
        points,
        fit,
        curvature,
        horizon_increments,
        monotone,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_deterministic() {
        let seeds: Vec<u64> = (0..10_000).map(|i| member_seed(42, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(member_seed(42, 17), seeds[17]);
        assert_ne!(member_seed(43, 17), seeds[17]);
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_white_noise::<f64>(8, 5).unwrap();
        let b = sample_white_noise::<f64>(8, 5).unwrap();
        let c = sample_white_noise::<f64>(8, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_white_noise::<f64>(0, 5).is_err());
    }

    #[test]
    fn log_density_values() {
        let z = SpectralState::<f64>::zeros(3).unwrap();
        assert_eq!(log_density(&z), 0.0);
        let one = SpectralState::single_mode(3, 1, Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(log_density(&one), -0.5);
    }

    #[test]
    fn small_sample_counts_are_refused() {
        let cfg = InvarianceConfig::new(4, 99, vec![0.0], 1);
        assert!(invariance_test(&cfg).is_err());
        let tail = TailConfig::new(4, 9_999, 1);
        assert!(tail_test(&tail).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let row = TestRow {
            observable: "ks_re",
            mode: Some(3),
            time: 0.5,
            statistic: 0.01,
            p_value: Some(0.5),
            standard_error: None,
            threshold: 0.001,
            pass: true,
        };
        let csv = rows_to_csv(&[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("ks_re,3,5.0000000000000000e-1,"));
        assert!(lines[1].ends_with(",true"));
    }
}

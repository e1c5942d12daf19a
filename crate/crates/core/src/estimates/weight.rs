//! The weight `v(n,τ) = 1 + Σ_{k≠0} min(⟨k⟩,⟨n−k⟩)^δ 1_{A_k}(n,τ)`.
//!
//! Membership is decided through `f(k) = (n−k)k` and `w = (m(n) − τ)/(3n)`:
//! `(n,τ) ∈ A_k` iff `⟨3n(f(k) − w)⟩ < c0⟨n⟩^{1/100}`, and the tight window
//! asks `|f(k) − w| < c0⟨n⟩^{−1+1/100}`. Since `f(k) = n²/4 − (k − n/2)²`,
//! candidates lie in at most two short integer ranges around the roots.

use super::{stabilised, EstimateReport, DEFAULT_C0, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::norms::bracket;
use crate::spectral::dispersion;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// `⟨τ − n³ + 1/n + 3n(n−k)k⟩ < c0⟨n⟩^{1/100}` (the sets `A_k`).
    Shifted,
    /// `|(n−k)k + (τ − n³ + 1/n)/(3n)| < c0⟨n⟩^{−1+1/100}`.
    Tight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub delta: f64,
    pub c0: f64,
    pub window: Window,
}

/// Default `c0` for the shifted window: `⟨·⟩ ≥ 1`, so the condition is
/// only satisfiable when `c0⟨n⟩^{1/100} > 1`.
pub const DEFAULT_SHIFTED_C0: f64 = 2.0;

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            delta: DEFAULT_EPSILON,
            c0: DEFAULT_SHIFTED_C0,
            window: Window::Shifted,
        }
    }
}

impl WeightParams {
    pub fn tight() -> Self {
        Self {
            delta: DEFAULT_EPSILON,
            c0: DEFAULT_C0,
            window: Window::Tight,
        }
    }
}

fn contains(n: i64, k: i64, tau: f64, params: &WeightParams) -> bool {
    let nf = n as f64;
    let f = ((n - k) as i128 * k as i128) as f64;
    let m = dispersion::<f64>(n).expect("n != 0");
    let bn = bracket(nf);
    match params.window {
        Window::Shifted => bracket(tau - m + 3.0 * nf * f) < params.c0 * bn.powf(0.01),
        Window::Tight => (f + (tau - m) / (3.0 * nf)).abs() < params.c0 * bn.powf(-0.99),
    }
}

/// All `k ≠ 0` with `(n, τ)` inside the window of `A_k`.
pub fn contributing_k(n: i64, tau: f64, params: &WeightParams) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(Error::ZeroFrequency("the weight v"));
    }
    if !(params.c0 > 0.0 && params.delta > 0.0) {
        return Err(Error::InvalidParameter("c0 and δ must be positive".into()));
    }
    let nf = n as f64;
    let bn = bracket(nf);
    let rho = match params.window {
        Window::Shifted => {
            let r = params.c0 * bn.powf(0.01);
            if r <= 1.0 {
                return Ok(vec![]);
            }
            (r * r - 1.0).sqrt() / (3.0 * nf.abs())
        }
        Window::Tight => params.c0 * bn.powf(-0.99),
    };
    let w = (dispersion::<f64>(n)? - tau) / (3.0 * nf);
    let centre = nf / 2.0;
    let hi = centre * centre - w + rho;
    if hi < 0.0 {
        return Ok(vec![]);
    }
    let lo = (centre * centre - w - rho).max(0.0);
    let (r_lo, r_hi) = (lo.sqrt(), hi.sqrt());
    let mut ks = vec![];
    for (a, b) in [(centre - r_hi, centre - r_lo), (centre + r_lo, centre + r_hi)] {
        let start = a.floor() as i64 - 1;
        let end = b.ceil() as i64 + 1;
        for k in start..=end {
            if k != 0 && !ks.contains(&k) && contains(n, k, tau, params) {
                ks.push(k);
            }
        }
    }
    ks.sort_unstable();
    Ok(ks)
}

/// `v(n, τ)`.
pub fn weight_v(n: i64, tau: f64, params: &WeightParams) -> Result<f64> {
    let ks = contributing_k(n, tau, params)?;
    Ok(1.0
        + ks.iter()
            .map(|&k| bracket(k as f64).min(bracket((n - k) as f64)).powf(params.delta))
            .sum::<f64>())
}

/// Scan grid for [`weight_bound_check`].
#[derive(Debug, Clone)]
pub struct WeightScan {
    pub n_max: i64,
    /// Shifted curves `τ = m(n) − 3n(n−k)k` for `|k| ≤ k_max`.
    pub k_max: i64,
    /// Offsets from each curve, in units of one.
    pub offsets: Vec<f64>,
    /// Uniform points per `n` across the scanned τ-range.
    pub uniform: usize,
    /// The `0⁺` exponent in `⟨τ − m(n)⟩^ε`.
    pub epsilon: f64,
}

impl WeightScan {
    pub fn new(n_max: i64) -> Self {
        Self {
            n_max,
            k_max: 2 * n_max,
            offsets: vec![-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0],
            uniform: 64,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// Halved offsets and twice the uniform points.
    pub fn refined(&self) -> Self {
        let mut offsets = self.offsets.clone();
        offsets.extend(self.offsets.iter().map(|o| o / 2.0 + 0.125));
        offsets.sort_by(f64::total_cmp);
        offsets.dedup();
        Self {
            offsets,
            uniform: 2 * self.uniform,
            ..self.clone()
        }
    }
}

struct ScanResult {
    sup: f64,
    witness: (i64, f64),
    max_count: usize,
}

fn scan(grid: &WeightScan, params: &WeightParams) -> Result<ScanResult> {
    let mut out = ScanResult {
        sup: 0.0,
        witness: (0, 0.0),
        max_count: 0,
    };
    for n in (-grid.n_max..=grid.n_max).filter(|&n| n != 0) {
        let m = dispersion::<f64>(n)?;
        let mut taus = vec![];
        for k in -grid.k_max..=grid.k_max {
            let curve = m - 3.0 * n as f64 * ((n - k) * k) as f64;
            taus.extend(grid.offsets.iter().map(|o| curve + o));
        }
        let span = 3.0 * (n.abs() as f64) * (grid.k_max * (grid.k_max + n.abs())) as f64;
        for i in 0..grid.uniform {
            taus.push(m - span + 2.0 * span * i as f64 / (grid.uniform - 1) as f64);
        }
        for tau in taus {
            let ks = contributing_k(n, tau, params)?;
            out.max_count = out.max_count.max(ks.len());
            let v = weight_v(n, tau, params)?;
            let ratio = v / bracket(tau - m).powf(grid.epsilon);
            if ratio > out.sup {
                out.sup = ratio;
                out.witness = (n, tau);
            }
        }
    }
    Ok(out)
}

/// `sup v(n,τ) / ⟨τ − m(n)⟩^ε` over the grid; passes when finite and stable
/// (within 1%) under [`WeightScan::refined`].
pub fn weight_bound_check(grid: &WeightScan, params: &WeightParams) -> Result<EstimateReport> {
    let coarse = scan(grid, params)?;
    let fine = scan(&grid.refined(), params)?;
    let mut report = EstimateReport::new("weight", &["refinement", "sup_ratio", "n", "tau", "max_k_count"]);
    for (level, r) in [(0.0, &coarse), (1.0, &fine)] {
        report.rows.push(vec![
            level,
            r.sup,
            r.witness.0 as f64,
            r.witness.1,
            r.max_count as f64,
        ]);
    }
    report.observed = fine.sup;
    report.reference = Some(coarse.sup);
    report.witness = vec![
        ("n".into(), fine.witness.0 as f64),
        ("tau".into(), fine.witness.1),
    ];
    report.ranges = vec![
        ("n".into(), -grid.n_max as f64, grid.n_max as f64),
        ("k".into(), -grid.k_max as f64, grid.k_max as f64),
    ];
    report.notes.push(format!(
        "delta={} c0={} window={:?} epsilon={} max contributing k={}",
        params.delta, params.c0, params.window, grid.epsilon, fine.max_count
    ));
    report.stable = stabilised(fine.sup, coarse.sup);
    report.pass = fine.sup.is_finite() && report.stable;
    Ok(report)
}

/// Largest number of contributing `k` over the scan grid.
pub fn max_contributing(grid: &WeightScan, params: &WeightParams) -> Result<usize> {
    Ok(scan(grid, params)?.max_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_from_every_curve_gives_one() {
        let p = WeightParams::default();
        // between the shifted curves for n = 5 (spacing 15·|Δf| ≥ 15)
        let m = dispersion::<f64>(5).unwrap();
        let tau = m - 3.0 * 5.0 * 6.0 + 7.5;
        assert_eq!(weight_v(5, tau, &p).unwrap(), 1.0);
    }

    #[test]
    fn on_a_shifted_curve_the_weight_is_raised() {
        let p = WeightParams::default();
        for (n, k0) in [(5i64, 2i64), (-7, 3), (12, -4), (3, 3)] {
            let tau = dispersion::<f64>(n).unwrap() - 3.0 * (n as f64) * ((n - k0) * k0) as f64;
            let floor = 1.0
                + bracket(k0 as f64)
                    .min(bracket((n - k0) as f64))
                    .powf(p.delta);
            let v = weight_v(n, tau, &p).unwrap();
            assert!(v >= floor - 1e-15, "n={n} k0={k0}: {v} < {floor}");
            assert!(contributing_k(n, tau, &p).unwrap().contains(&k0));
        }
    }

    #[test]
    fn small_c0_empties_the_shifted_window() {
        let p = WeightParams {
            c0: 0.1,
            ..WeightParams::default()
        };
        let tau = dispersion::<f64>(6).unwrap();
        assert_eq!(weight_v(6, tau, &p).unwrap(), 1.0);
    }

    #[test]
    fn candidates_match_brute_force() {
        for params in [WeightParams::default(), WeightParams::tight()] {
            for n in [-9i64, -2, 1, 4, 13] {
                let m = dispersion::<f64>(n).unwrap();
                for j in -40..=40 {
                    let tau = m + 1.7 * j as f64 * n.abs() as f64;
                    let fast = contributing_k(n, tau, &params).unwrap();
                    let brute: Vec<i64> = (-200..=200)
                        .filter(|&k| k != 0 && contains(n, k, tau, &params))
                        .collect();
                    assert_eq!(fast, brute, "n={n} tau={tau} {params:?}");
                }
            }
        }
    }

    #[test]
    fn zero_frequency_is_rejected() {
        assert!(weight_v(0, 1.0, &WeightParams::default()).is_err());
    }
}

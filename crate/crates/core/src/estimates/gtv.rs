//! `I(a) = ∫ ⟨τ⟩^{−2α} ⟨τ−a⟩^{−2β} dτ` and the decay `I(a) ≲ ⟨a⟩^{−γ}`,
//! `γ = 2α − [1−2β]₊`.

use super::{stabilised, EstimateReport, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::norms::bracket;
use crate::quadrature::integrate;

const TOLERANCE: f64 = 1e-12;
const MAX_INTERVALS: usize = 20_000;

fn check(alpha: f64, beta: f64) -> Result<()> {
    if !(0.0 <= alpha && alpha <= beta && alpha + beta > 0.5) {
        return Err(Error::Hypothesis(format!(
            "need 0 <= alpha <= beta and alpha + beta > 1/2 (alpha = {alpha}, beta = {beta})"
        )));
    }
    Ok(())
}

/// `I(a)`.
///
/// Finite pieces are integrated adaptively after the substitution
/// `τ = τ₀ ± (e^u − 1)` away from each peak; the two tails beyond
/// distance `X = 10⁸(1+|a|)` use the expansion
/// `τ^{−q}(1 ± 2βa/τ)`, `q = 2(α+β)`.
pub fn gtv_integral(alpha: f64, beta: f64, a: f64) -> Result<f64> {
    check(alpha, beta)?;
    let f = move |t: f64| bracket(t).powf(-2.0 * alpha) * bracket(t - a).powf(-2.0 * beta);
    let (lo, hi) = (a.min(0.0), a.max(0.0));
    let reach = 1e8 * (1.0 + a.abs());

    // τ = start + dir·(e^u − 1), u ∈ [0, ln(1 + len)]
    let mapped = |start: f64, dir: f64, len: f64| -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        let g = |u: f64| {
            let e = u.exp();
            f(start + dir * (e - 1.0)) * e
        };
        integrate(g, 0.0, len.ln_1p(), TOLERANCE, MAX_INTERVALS).0
    };

    let half = 0.5 * (hi - lo);
    let mut total = mapped(lo, 1.0, half) + mapped(hi, -1.0, half);
    total += mapped(hi, 1.0, reach) + mapped(lo, -1.0, reach);

    let q = 2.0 * (alpha + beta);
    let right = hi + reach;
    let left = reach - lo;
    total += right.powf(1.0 - q) / (q - 1.0) + 2.0 * beta * a * right.powf(-q) / q;
    total += left.powf(1.0 - q) / (q - 1.0) - 2.0 * beta * a * left.powf(-q) / q;
    Ok(total)
}

/// `γ = 2α − [1−2β]₊` with `[0]₊ = ε`.
pub fn gamma(alpha: f64, beta: f64, epsilon: f64) -> f64 {
    let x = 1.0 - 2.0 * beta;
    let plus = if x > 0.0 {
        x
    } else if x == 0.0 {
        epsilon
    } else {
        0.0
    };
    2.0 * alpha - plus
}

/// `0` followed by a log grid `10^{-2} … a_max`, 10 points per decade.
pub fn default_a_grid(a_max: f64) -> Vec<f64> {
    let decades = (a_max.log10() + 2.0).ceil() as usize;
    let mut grid = vec![0.0];
    grid.extend((0..=10 * decades).map(|i| 10f64.powf(-2.0 + i as f64 / 10.0)).filter(|&a| a <= a_max * (1.0 + 1e-12)));
    grid
}

/// `sup_a I(a)⟨a⟩^γ` over `a_grid`. Stability compares against the grid
/// truncated one decade short of its maximum.
pub fn gtv_bound_check(alpha: f64, beta: f64, a_grid: &[f64], epsilon: f64) -> Result<EstimateReport> {
    check(alpha, beta)?;
    if a_grid.is_empty() {
        return Err(Error::InvalidParameter("empty a-grid".into()));
    }
    let g = gamma(alpha, beta, epsilon);
    let mut report = EstimateReport::new("gtv", &["a", "integral", "scaled"]);
    let a_max = a_grid.iter().fold(0.0f64, |m, &a| m.max(a.abs()));
    let mut sup = (f64::NEG_INFINITY, 0.0);
    let mut sup_short = f64::NEG_INFINITY;
    for &a in a_grid {
        let value = gtv_integral(alpha, beta, a)?;
        let scaled = value * bracket(a).powf(g);
        report.rows.push(vec![a, value, scaled]);
        if scaled > sup.0 {
            sup = (scaled, a);
        }
        if a.abs() <= a_max / 10.0 {
            sup_short = sup_short.max(scaled);
        }
    }
    report.observed = sup.0;
    report.witness = vec![("a".into(), sup.1)];
    report.reference = sup_short.is_finite().then_some(sup_short);
    report.ranges = vec![("a".into(), a_grid.iter().cloned().fold(f64::INFINITY, f64::min), a_max)];
    report.notes.push(format!("alpha={alpha} beta={beta} gamma={g} epsilon={epsilon}"));
    report.stable = report.reference.is_some_and(|r| stabilised(sup.0, r));
    report.pass = sup.0.is_finite() && report.stable;
    Ok(report)
}

pub fn gtv_bound_check_default(alpha: f64, beta: f64) -> Result<EstimateReport> {
    gtv_bound_check(alpha, beta, &default_a_grid(1e6), DEFAULT_EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lorentzian_closed_form() {
        assert!((gtv_integral(0.5, 0.5, 0.0).unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn beta_only_closed_form() {
        // α = 0: ∫⟨τ−a⟩^{-2} = π for every a
        for a in [0.0, 3.0, -1e4] {
            assert!((gtv_integral(0.0, 1.0, a).unwrap() - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn even_in_a() {
        for a in [0.3, 7.0, 2500.0] {
            let p = gtv_integral(0.3, 0.6, a).unwrap();
            let m = gtv_integral(0.3, 0.6, -a).unwrap();
            assert!(p > 0.0);
            assert!((p - m).abs() < 1e-10 * p.max(1.0));
        }
    }

    #[test]
    fn hypotheses_are_enforced() {
        assert!(gtv_integral(0.6, 0.5, 0.0).is_err());
        assert!(gtv_integral(0.2, 0.25, 0.0).is_err());
        assert!(gtv_integral(-0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn gamma_branches() {
        assert_eq!(gamma(0.5, 0.5, 0.01), 0.99);
        assert_eq!(gamma(0.3, 0.6, 0.01), 0.6);
        assert!((gamma(0.4, 0.3, 0.01) - 0.4).abs() < 1e-15);
    }
}

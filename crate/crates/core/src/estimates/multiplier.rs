//! `S(n, λ) = Σ_{n₁≠0,n} ⟨n₁⟩^{−l₁} ⟨λ + n₁(n−n₁)⟩^{−l₂}`, bounded uniformly
//! in `n ≠ 0`, `λ ∈ ℝ` when `l₁ + 2l₂ > 1`.

use super::{stabilised, EstimateReport};
use crate::error::{Error, Result};
use crate::norms::bracket;

/// Target for the rigorous tail bound.
pub const TAIL_TARGET: f64 = 1e-8;
/// Largest cutoff [`multiplier_sum`] will sum to.
pub const MAX_CUTOFF: i64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSum {
    /// `Σ_{0<|n₁|≤K, n₁≠n}` of the summand.
    pub partial: f64,
    /// Upper bound on the terms with `|n₁| > K`.
    pub tail_bound: f64,
    pub cutoff: i64,
}

impl MultiplierSum {
    /// `partial + tail_bound`: a certified upper bound on `S(n, λ)`.
    pub fn value(&self) -> f64 {
        self.partial + self.tail_bound
    }
}

fn check(l1: f64, l2: f64, n: i64) -> Result<()> {
    if !(l1 > 0.0 && l2 > 0.0 && l1 + 2.0 * l2 > 1.0) {
        return Err(Error::Hypothesis(format!(
            "need l1, l2 > 0 and l1 + 2 l2 > 1 (l1 = {l1}, l2 = {l2})"
        )));
    }
    if n == 0 {
        return Err(Error::ZeroFrequency("the multiplier sum"));
    }
    Ok(())
}

fn summand(l1: f64, l2: f64, n: i64, lambda: f64, n1: i64) -> f64 {
    let quad = lambda + (n1 as i128 * (n - n1) as i128) as f64;
    bracket(n1 as f64).powf(-l1) * bracket(quad).powf(-l2)
}

/// Smallest admissible cutoff for the tail bound at `(n, λ)`.
fn min_cutoff(n: i64, lambda: f64) -> i64 {
    (2 * n.abs()).max((2.0 * lambda.abs().sqrt()).ceil() as i64).max(1)
}

/// For `|n₁| ≥ K ≥ max(2|n|, 2√|λ|)`: `|λ + n₁(n−n₁)| ≥ n₁²/4`, so each term
/// is at most `4^{l₂} |n₁|^{−q}`, `q = l₁ + 2l₂`, and the two tails sum to at
/// most `2·4^{l₂} K^{1−q}/(q−1)`.
pub fn tail_bound(l1: f64, l2: f64, cutoff: i64) -> f64 {
    let q = l1 + 2.0 * l2;
    2.0 * 4f64.powf(l2) * (cutoff as f64).powf(1.0 - q) / (q - 1.0)
}

/// Partial sum over `0 < |n₁| ≤ cutoff`, `n₁ ≠ n`, summed symmetrically
/// outward from `n₁ = ±1`.
pub fn partial_sum(l1: f64, l2: f64, n: i64, lambda: f64, cutoff: i64) -> f64 {
    let mut total = 0.0;
    for k in (1..=cutoff).rev() {
        for n1 in [k, -k] {
            if n1 != n {
                total += summand(l1, l2, n, lambda, n1);
            }
        }
    }
    total
}

/// `S(n, λ)` with the cutoff chosen so the tail bound is below
/// [`TAIL_TARGET`] when that needs at most [`MAX_CUTOFF`] terms per side.
pub fn multiplier_sum(l1: f64, l2: f64, n: i64, lambda: f64) -> Result<MultiplierSum> {
    check(l1, l2, n)?;
    let q = l1 + 2.0 * l2;
    let needed = (2.0 * 4f64.powf(l2) / ((q - 1.0) * TAIL_TARGET)).powf(1.0 / (q - 1.0));
    let cutoff = if needed.is_finite() {
        (needed.ceil() as i64).min(MAX_CUTOFF)
    } else {
        MAX_CUTOFF
    }
    .max(min_cutoff(n, lambda));
    multiplier_sum_with_cutoff(l1, l2, n, lambda, cutoff)
}

pub fn multiplier_sum_with_cutoff(
    l1: f64,
    l2: f64,
    n: i64,
    lambda: f64,
    cutoff: i64,
) -> Result<MultiplierSum> {
    check(l1, l2, n)?;
    let cutoff = cutoff.max(min_cutoff(n, lambda));
    Ok(MultiplierSum {
        partial: partial_sum(l1, l2, n, lambda, cutoff),
        tail_bound: tail_bound(l1, l2, cutoff),
        cutoff,
    })
}

/// Search grid for [`multiplier_sup_search`].
#[derive(Debug, Clone)]
pub struct SupSearch {
    pub n_max: i64,
    pub lambda_max: f64,
    /// Spacing of the uniform λ-grid.
    pub lambda_step: f64,
    /// Offsets around each critical `λ = −k(n−k)`.
    pub offsets: Vec<f64>,
    /// Summation cutoff used during the search.
    pub cutoff: i64,
}

impl SupSearch {
    pub fn new(n_max: i64, lambda_max: f64) -> Self {
        Self {
            n_max,
            lambda_max,
            lambda_step: 1.0,
            offsets: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
            cutoff: 2_000,
        }
    }

    pub fn refined(&self) -> Self {
        let mut offsets = self.offsets.clone();
        offsets.extend(self.offsets.iter().map(|o| o / 2.0 + 0.0625));
        offsets.sort_by(f64::total_cmp);
        offsets.dedup();
        Self {
            lambda_step: self.lambda_step / 2.0,
            offsets,
            ..self.clone()
        }
    }

    fn lambdas(&self, n: i64) -> Vec<f64> {
        let mut out = vec![];
        let steps = (2.0 * self.lambda_max / self.lambda_step).round() as i64;
        out.extend((0..=steps).map(|i| -self.lambda_max + i as f64 * self.lambda_step));
        // λ = −k(n−k) puts integer roots of λ + n₁(n−n₁) at n₁ = k, n − k
        let k_reach = (self.lambda_max.sqrt() as i64) + n.abs() + 1;
        for k in -k_reach..=k_reach {
            let crit = -((k * (n - k)) as f64);
            if crit.abs() <= self.lambda_max {
                out.extend(self.offsets.iter().map(|o| crit + o));
            }
        }
        out.retain(|l| l.abs() <= self.lambda_max);
        out
    }
}

fn search(l1: f64, l2: f64, grid: &SupSearch) -> Result<(f64, i64, f64)> {
    let mut best = (f64::NEG_INFINITY, 0, 0.0);
    for n in (-grid.n_max..=grid.n_max).filter(|&n| n != 0) {
        for lambda in grid.lambdas(n) {
            let v = multiplier_sum_with_cutoff(l1, l2, n, lambda, grid.cutoff)?.value();
            if v > best.0 {
                best = (v, n, lambda);
            }
        }
    }
    Ok(best)
}

/// `sup S(n, λ)` over the grid and over its refinement; passes when the two
/// agree within 1%.
pub fn multiplier_sup_search(l1: f64, l2: f64, grid: &SupSearch) -> Result<EstimateReport> {
    check(l1, l2, 1)?;
    let coarse = search(l1, l2, grid)?;
    let fine = search(l1, l2, &grid.refined())?;
    let mut report = EstimateReport::new("sum", &["refinement", "sup", "n", "lambda"]);
    report.rows.push(vec![0.0, coarse.0, coarse.1 as f64, coarse.2]);
    report.rows.push(vec![1.0, fine.0, fine.1 as f64, fine.2]);
    report.observed = fine.0;
    report.reference = Some(coarse.0);
    report.witness = vec![("n".into(), fine.1 as f64), ("lambda".into(), fine.2)];
    report.ranges = vec![
        ("n".into(), -grid.n_max as f64, grid.n_max as f64),
        ("lambda".into(), -grid.lambda_max, grid.lambda_max),
    ];
    report.notes.push(format!(
        "l1={l1} l2={l2} cutoff={} (values include the tail bound {})",
        grid.cutoff,
        tail_bound(l1, l2, grid.cutoff)
    ));
    report.stable = stabilised(fine.0, coarse.0);
    report.pass = fine.0.is_finite() && report.stable;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_gate() {
        assert!(multiplier_sum(1.2, 0.05, 1, 0.0).is_ok());
        assert!(matches!(
            multiplier_sum(0.5, 0.2, 1, 0.0),
            Err(Error::Hypothesis(_))
        ));
        assert!(multiplier_sum(1.0, 0.5, 0, 0.0).is_err());
    }

    #[test]
    fn reflection_symmetry() {
        for (n, lambda) in [(3, 0.0), (5, -6.0), (2, 17.5)] {
            let a = multiplier_sum_with_cutoff(1.0, 0.5, n, lambda, 5000).unwrap();
            let b = multiplier_sum_with_cutoff(1.0, 0.5, -n, lambda, 5000).unwrap();
            assert!((a.partial - b.partial).abs() < 1e-13 * a.partial);
            assert!(a.partial > 0.0);
        }
    }

    #[test]
    fn tail_bound_dominates_the_tail() {
        let (l1, l2, n, lambda) = (1.0, 0.4, 3, -20.0);
        let k = 100;
        let far = partial_sum(l1, l2, n, lambda, 200_000) - partial_sum(l1, l2, n, lambda, k);
        assert!(far > 0.0 && far <= tail_bound(l1, l2, k));
    }

    #[test]
    fn monotone_in_exponents() {
        let base = partial_sum(1.0, 0.5, 4, 3.0, 3000);
        assert!(partial_sum(1.1, 0.5, 4, 3.0, 3000) < base);
        assert!(partial_sum(1.0, 0.6, 4, 3.0, 3000) < base);
    }
}

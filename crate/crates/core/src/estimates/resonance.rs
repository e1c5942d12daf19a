//! Resonance function `σ = max{|τ+m(n)|, |τ₁+m(n₁)|, |τ−τ₁+m(n₂)|}`,
//! `n₂ = n − n₁`.
//!
//! With `τ₂ = τ − τ₁` the three modulations sum to
//! `m(n) − m(n₁) − m(n₂) = 3nn₁n₂ + 1/n₁ + 1/n₂ − 1/n`, so
//! `σ ≥ |m(n) − m(n₁) − m(n₂)| / 3` with equality for the worst `τ, τ₁`.
//! The algebra is generic: it runs over `f64` and over exact rationals.

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

use super::{stabilised, EstimateReport};
use crate::error::{Error, Result};
use crate::spectral::dispersion;

/// Scalars the resonance algebra runs over (floats, `Ratio<i128>`, …).
pub trait Exact: Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone {}
impl<T: Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone> Exact for T {}

fn check(n: i64, n1: i64) -> Result<i64> {
    let n2 = n - n1;
    if n == 0 || n1 == 0 || n2 == 0 {
        return Err(Error::ZeroFrequency("the resonance function"));
    }
    Ok(n2)
}

fn max3<T: PartialOrd>(a: T, b: T, c: T) -> T {
    let ab = if a >= b { a } else { b };
    if ab >= c {
        ab
    } else {
        c
    }
}

/// `σ(τ, τ₁, n, n₁)`.
pub fn resonance_gap<T: Exact>(n: i64, n1: i64, tau: T, tau1: T) -> Result<T> {
    let n2 = check(n, n1)?;
    let first = (tau.clone() + dispersion::<T>(n)?).abs();
    let second = (tau1.clone() + dispersion::<T>(n1)?).abs();
    let third = (tau - tau1 + dispersion::<T>(n2)?).abs();
    Ok(max3(first, second, third))
}

/// `m(n) − m(n₁) − m(n₂)`.
pub fn resonance_defect<T: Exact>(n: i64, n1: i64) -> Result<T> {
    let n2 = check(n, n1)?;
    Ok(dispersion::<T>(n)? - dispersion::<T>(n1)? - dispersion::<T>(n2)?)
}

/// `min_{τ,τ₁} σ / |n n₁ n₂| = |m(n) − m(n₁) − m(n₂)| / (3|n n₁ n₂|)`.
pub fn worst_case_ratio<T: Exact>(n: i64, n1: i64) -> Result<T> {
    let n2 = n - n1;
    let defect = resonance_defect::<T>(n, n1)?;
    let denom = T::from_i64(3 * (n * n1 * n2).abs()).expect("representable");
    Ok(defect.abs() / denom)
}

/// Minimum of [`worst_case_ratio`] over `0 < |n|, |n₁| ≤ L`, `n₂ ≠ 0`.
pub fn min_ratio<T: Exact>(l: i64) -> (T, (i64, i64)) {
    let mut best: Option<(T, (i64, i64))> = None;
    for n in -l..=l {
        for n1 in -l..=l {
            if n == 0 || n1 == 0 || n == n1 {
                continue;
            }
            let r = worst_case_ratio::<T>(n, n1).expect("admissible");
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                best = Some((r, (n, n1)));
            }
        }
    }
    best.expect("L >= 1 has admissible pairs")
}

/// Scan of the worst-case ratio for `L = 2, 4, …, l` (and `l` itself).
/// Passes when the minimum is positive and moves by less than 1% between
/// `l/2` and `l`.
pub fn resonance_min_ratio<T: Exact>(l: i64) -> Result<EstimateReport> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("L = {l} must be >= 2")));
    }
    let mut report = EstimateReport::new("resonance", &["L", "min_ratio", "n", "n1"]);
    let mut sizes: Vec<i64> = std::iter::successors(Some(2i64), |x| Some(x * 2))
        .take_while(|&x| x < l)
        .collect();
    if l / 2 >= 2 && !sizes.contains(&(l / 2)) {
        sizes.push(l / 2);
    }
    sizes.sort_unstable();
    sizes.push(l);
    let mut previous = None;
    for &size in &sizes {
        let (value, (n, n1)) = min_ratio::<T>(size);
        let v = value.to_f64().expect("finite");
        report
            .rows
            .push(vec![size as f64, v, n as f64, n1 as f64]);
        if size == l {
            report.observed = v;
            report.witness = vec![("n".into(), n as f64), ("n1".into(), n1 as f64)];
            report.reference = previous;
        }
        if size == l / 2 {
            previous = Some(v);
        }
    }
    report.ranges = vec![
        ("n".into(), -l as f64, l as f64),
        ("n1".into(), -l as f64, l as f64),
    ];
    report.stable = report
        .reference
        .is_some_and(|r| stabilised(report.observed, r));
    report.pass = report.observed > 0.0 && report.stable;
    Ok(report)
}

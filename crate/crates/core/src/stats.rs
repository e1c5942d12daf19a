//! Small statistics toolkit: Kolmogorov–Smirnov tests, moments, quantiles
//! and least-squares fits.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Result of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ Σ_k exp(-(2k-1)²π²/(8λ²))
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=20)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (odd * odd * c).exp()
            })
            .sum::<f64>()
            * (std::f64::consts::TAU).sqrt()
            / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn finite_sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample KS test with the Stephens small-sample correction
/// `λ = (√nₑ + 0.12 + 0.11/√nₑ) D`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsOutcome> {
    let a = finite_sorted(xs)?;
    let b = finite_sorted(ys)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    Ok(KsOutcome {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    })
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    let a = finite_sorted(xs)?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let en = n.sqrt();
    Ok(KsOutcome {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    })
}

/// CDF of `χ²_k`.
pub fn chi_squared_cdf(k: f64) -> impl Fn(f64) -> f64 {
    let dist = ChiSquared::new(k).expect("positive degrees of freedom");
    move |x| dist.cdf(x)
}

/// Sample mean and the standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Inverse-ECDF quantile `x_(⌈qM⌉)`, pinned to the minimum at `q = 0`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let m = sorted.len();
    let rank = (q.clamp(0.0, 1.0) * m as f64).ceil() as usize;
    sorted[rank.saturating_sub(1).min(m - 1)]
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope (`NaN` with fewer than three points).
    pub slope_se: f64,
    /// Residual standard deviation.
    pub residual_sd: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "line fit needs at least two paired points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let (slope_se, residual_sd) = if x.len() > 2 {
        let s2 = sse / (n - 2.0);
        ((s2 / sxx).sqrt(), s2.sqrt())
    } else {
        (f64::NAN, 0.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
        residual_sd,
    })
}

/// Least-squares parabola `y ≈ c0 + c1 x + c2 x²`; returns `(c, se(c2))`.
pub fn fit_quadratic(x: &[f64], y: &[f64]) -> Result<([f64; 3], f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidParameter(
            "quadratic fit needs at least three points".into(),
        ));
    }
    // normal equations, centred for conditioning
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let t = xi - mx;
        let basis = [1.0, t, t * t];
        for r in 0..3 {
            rhs[r] += basis[r] * yi;
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
        }
    }
    let inv = invert3(&a).ok_or_else(|| Error::InvalidParameter("singular quadratic fit".into()))?;
    let mut coef = [0.0f64; 3];
    for r in 0..3 {
        coef[r] = (0..3).map(|c| inv[r][c] * rhs[c]).sum();
    }
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let t = xi - mx;
            (yi - coef[0] - coef[1] * t - coef[2] * t * t).powi(2)
        })
        .sum();
    let dof = n - 3.0;
    let se2 = if dof > 0.0 {
        (sse / dof * inv[2][2]).sqrt()
    } else {
        f64::NAN
    };
    // back to the uncentred basis
    let c2 = coef[2];
    let c1 = coef[1] - 2.0 * c2 * mx;
    let c0 = coef[0] - coef[1] * mx + c2 * mx * mx;
    Ok(([c0, c1, c2], se2))
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
            let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
            inv[r][c] = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det;
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_branches_agree() {
        for lambda in [0.9, 1.0, 1.1, 1.17, 1.19, 1.3] {
            // evaluate the other series directly
            let alt: f64 = 2.0
                * (1..100)
                    .map(|k| {
                        let kf = k as f64;
                        let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                        s * (-2.0 * kf * kf * lambda * lambda).exp()
                    })
                    .sum::<f64>();
            assert!((kolmogorov_survival(lambda) - alt).abs() < 1e-12, "{lambda}");
        }
        // P(K > 1.3581) ≈ 0.05, P(K > 1.6276) ≈ 0.01
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn ks_identical_and_disjoint_samples() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let same = ks_two_sample(&x, &x).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let y: Vec<f64> = x.iter().map(|v| v + 1000.0).collect();
        let apart = ks_two_sample(&x, &y).unwrap();
        assert_eq!(apart.statistic, 1.0);
        assert!(apart.p_value < 1e-10);
    }

    #[test]
    fn ks_one_sample_uniform_grid() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let out = ks_one_sample(&x, |v| v.clamp(0.0, 1.0)).unwrap();
        assert!((out.statistic - 0.0005).abs() < 1e-12);
        assert!(out.p_value > 0.99);
    }

    #[test]
    fn quantile_convention() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.0);
        assert_eq!(quantile_sorted(&s, 0.51), 3.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }

    #[test]
    fn exact_fits() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        let y2: Vec<f64> = x.iter().map(|v| 3.0 + v - 0.5 * v * v).collect();
        let (c, _) = fit_quadratic(&x, &y2).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12 && (c[2] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn chi_squared_median() {
        // median of χ²_2 is 2 ln 2
        let cdf = chi_squared_cdf(2.0);
        assert!((cdf(2.0 * 2f64.ln()) - 0.5).abs() < 1e-12);
    }
}

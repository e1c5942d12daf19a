//! Sobolev and dyadic Besov-type norms of truncated spectra.
//!
//! Spectra are `f̂(1..N)`; negative frequencies enter through
//! `|f̂(-n)| = |f̂(n)|`, so every block sum counts `±n`. Block `j` is
//! `{n : 2^j ≤ |n| < 2^{j+1}}`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `⟨n⟩ = (1 + n²)^{1/2}`.
pub fn bracket<T: Real>(x: T) -> T {
    (T::one() + x * x).sqrt()
}

/// Index of the dyadic block containing `|n| ≥ 1`.
pub fn block_index(n: usize) -> usize {
    debug_assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Per-block weighted `ℓ^p` norms of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicProfile<T> {
    pub s: T,
    pub p: T,
    /// `(Σ_{|n| ∈ block j} ⟨n⟩^{sp} |f̂(n)|^p)^{1/p}` for `j = 0, 1, …`.
    pub block_norms: Vec<T>,
}

impl<T: Real> DyadicProfile<T> {
    pub fn sup(&self) -> T {
        self.block_norms.iter().fold(T::zero(), |acc, &b| acc.max(b))
    }

    pub fn sum(&self) -> T {
        self.block_norms.iter().fold(T::zero(), |acc, &b| acc + b)
    }

    /// `j,block_norm` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,block_norm\n");
        for (j, b) in self.block_norms.iter().enumerate() {
            out.push_str(&format!("{j},{:.16e}\n", b.as_f64()));
        }
        out
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if p > T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} must exceed 1")))
    }
}

pub fn dyadic_profile<T: Real>(spectrum: &[Complex<T>], s: T, p: T) -> Result<DyadicProfile<T>> {
    check_p(p)?;
    let blocks = if spectrum.is_empty() {
        0
    } else {
        block_index(spectrum.len()) + 1
    };
    let mut acc = vec![T::zero(); blocks];
    let two = T::lit(2.0);
    for (k, a) in spectrum.iter().enumerate() {
        let n = k + 1;
        let w = bracket(T::from_index(n)).powf(s * p);
        acc[block_index(n)] = acc[block_index(n)] + two * w * a.norm().powf(p);
    }
    let inv_p = T::one() / p;
    Ok(DyadicProfile {
        s,
        p,
        block_norms: acc.into_iter().map(|x| x.powf(inv_p)).collect(),
    })
}

/// `‖f‖_{b̂^s_{p,∞}}`: supremum of the block norms.
pub fn besov_sup<T: Real>(spectrum: &[Complex<T>], s: T, p: T) -> Result<T> {
    Ok(dyadic_profile(spectrum, s, p)?.sup())
}

/// `‖f‖_{b̂^s_{p,1}}`: sum of the block norms.
pub fn besov_l1<T: Real>(spectrum: &[Complex<T>], s: T, p: T) -> Result<T> {
    Ok(dyadic_profile(spectrum, s, p)?.sum())
}

/// `‖u‖_{H^s} = (2π)^{1/2} (Σ_{0<|n|≤N} ⟨n⟩^{2s} |a_n|²)^{1/2}`.
pub fn sobolev_norm<T: Real>(spectrum: &[Complex<T>], s: T) -> T {
    let two = T::lit(2.0);
    let sum = spectrum.iter().enumerate().fold(T::zero(), |acc, (k, a)| {
        acc + two * bracket(T::from_index(k + 1)).powf(two * s) * a.norm_sqr()
    });
    (T::TAU() * sum).sqrt()
}

/// `Σ_{0<|n|≤N} ⟨n⟩^{sp} |f̂(n)|^p`, the `p`-th power of the `ℓ^p` sum over all
/// blocks.
pub fn weighted_power_sum<T: Real>(spectrum: &[Complex<T>], s: T, p: T) -> T {
    let two = T::lit(2.0);
    spectrum.iter().enumerate().fold(T::zero(), |acc, (k, a)| {
        acc + two * bracket(T::from_index(k + 1)).powf(s * p) * a.norm().powf(p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vec<Complex<f64>> {
        vec![Complex::new(1.0, 0.0); n]
    }

    #[test]
    fn worked_block_example() {
        let prof = dyadic_profile(&ones(4), 0.0, 2.0).unwrap();
        let r2 = 2f64.sqrt();
        assert_eq!(prof.block_norms.len(), 3);
        assert!((prof.block_norms[0] - r2).abs() < 1e-15);
        assert_eq!(prof.block_norms[1], 2.0);
        assert!((prof.block_norms[2] - r2).abs() < 1e-15);
        assert_eq!(besov_sup(&ones(4), 0.0, 2.0).unwrap(), 2.0);
        assert!((besov_l1(&ones(4), 0.0, 2.0).unwrap() - (2.0 + 2.0 * r2)).abs() < 1e-14);
    }

    #[test]
    fn zero_and_empty_spectra() {
        let z = vec![Complex::new(0.0, 0.0); 9];
        assert_eq!(besov_sup(&z, -0.49, 2.05).unwrap(), 0.0);
        assert_eq!(besov_l1::<f64>(&[], -0.49, 2.05).unwrap(), 0.0);
        assert_eq!(sobolev_norm::<f64>(&[], 1.0), 0.0);
    }

    #[test]
    fn single_block_sup_equals_sum() {
        let mut f = vec![Complex::new(0.0f64, 0.0); 7];
        f[4] = Complex::new(0.3, -1.0);
        f[6] = Complex::new(2.0, 0.5);
        let (a, b) = (besov_sup(&f, 0.3, 3.0).unwrap(), besov_l1(&f, 0.3, 3.0).unwrap());
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn sobolev_single_mode() {
        let pi = std::f64::consts::PI;
        for n in 1..6 {
            let mut f = vec![Complex::new(0.0, 0.0); 6];
            f[n - 1] = Complex::new(1.0, 0.0);
            let mut last = 0.0;
            for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let got = sobolev_norm(&f, s);
                let want = (4.0 * pi).sqrt() * (1.0 + (n * n) as f64).powf(s / 2.0);
                assert!((got - want).abs() < 1e-13 * want);
                assert!(got > last);
                last = got;
            }
        }
    }

    #[test]
    fn p_must_exceed_one() {
        assert!(besov_sup(&ones(3), 0.0, 1.0).is_err());
    }

    #[test]
    fn blocks() {
        assert_eq!(block_index(1), 0);
        assert_eq!(block_index(3), 1);
        assert_eq!(block_index(4), 2);
        assert_eq!(block_index(64), 6);
    }
}

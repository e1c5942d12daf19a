use std::f64::consts::PI;

use num_complex::Complex;
use ostrovsky::integrator::Nonlinearity;
use ostrovsky::measure::{
    growth_test, invariance_test, member_seed, sample_norms, sample_white_noise, GrowthConfig,
    InvarianceConfig, Verdict,
};
use ostrovsky::norms::{besov_l1, besov_sup, dyadic_profile, sobolev_norm, weighted_power_sum};
use ostrovsky::stats::{ks_one_sample, mean_and_se};
use ostrovsky::State;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

fn random_spectrum(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex<f64>> {
    (0..len)
        .map(|_| Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
        .collect()
}

#[test]
fn sampler_is_reproducible_and_standard() {
    let a: State = sample_white_noise(16, 42).unwrap();
    let b: State = sample_white_noise(16, 42).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, sample_white_noise(16, 43).unwrap());
    // pooled real parts of 2000 draws against Φ
    let xs: Vec<f64> = (0..2000)
        .flat_map(|i| {
            let u: State = sample_white_noise(4, member_seed(9, i)).unwrap();
            u.modes().iter().map(|a| a.re).collect::<Vec<_>>()
        })
        .collect();
    let normal = Normal::standard();
    let ks = ks_one_sample(&xs, |x| normal.cdf(x)).unwrap();
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn member_seeds_are_distinct() {
    let mut seeds: Vec<u64> = (0..100_000).map(|i| member_seed(1, i)).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 100_000);
}

#[test]
fn block_partition_recovers_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let len = rng.random_range(1..200);
        let spec = random_spectrum(&mut rng, len);
        let profile = dyadic_profile(&spec, 0.0, 2.0).unwrap();
        let blocks: f64 = profile.block_norms.iter().map(|b| b * b).sum();
        let direct: f64 = spec.iter().map(|a| 2.0 * a.norm_sqr()).sum();
        assert!((blocks - direct).abs() <= 1e-12 * direct);
    }
}

#[test]
fn besov_norms_are_ordered_and_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let spec = random_spectrum(&mut rng, 70);
        let (s, p) = (-0.49, 2.05);
        let sup = besov_sup(&spec, s, p).unwrap();
        let l1 = besov_l1(&spec, s, p).unwrap();
        assert!(sup <= l1);
        let scaled: Vec<_> = spec.iter().map(|a| a * -2.5).collect();
        assert!((besov_sup(&scaled, s, p).unwrap() - 2.5 * sup).abs() < 1e-12 * sup);
        // ℓ^p over all blocks bounds each block
        let total = weighted_power_sum(&spec, s, p).powf(1.0 / p);
        assert!(sup <= total * (1.0 + 1e-12));
    }
}

#[test]
fn hand_values() {
    let ones = vec![Complex::new(1.0, 0.0); 4];
    assert_eq!(besov_sup(&ones, 0.0, 2.0).unwrap(), 2.0);
    let cos = [Complex::new(1.0, 0.0)];
    assert!((sobolev_norm(&cos, 0.0) - (4.0 * PI).sqrt()).abs() < 1e-12);
    // only block 1 (modes 2, 3) is occupied: sup equals sum
    let single = [Complex::new(0.0, 0.0), Complex::new(1.0, 2.0), Complex::new(-1.0, 0.5)];
    let (a, b): (f64, f64) = (besov_sup(&single, 0.3, 3.0).unwrap(), besov_l1(&single, 0.3, 3.0).unwrap());
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn weighted_power_sum_has_the_gaussian_mean() {
    // E|g|^p = 2^{p/2} Γ(1 + p/2) for a standard complex Gaussian
    let (n, s, p) = (16usize, -0.49, 2.05);
    let moment = 2f64.powf(p / 2.0) * gamma(1.0 + p / 2.0);
    let expected: f64 = (1..=n)
        .map(|k| 2.0 * (1.0 + (k * k) as f64).powf(s * p / 2.0) * moment)
        .sum();
    let draws: Vec<f64> = (0..20_000)
        .map(|i| {
            let u: State = sample_white_noise(n, member_seed(5, i)).unwrap();
            weighted_power_sum(u.modes(), s, p)
        })
        .collect();
    let (mean, se) = mean_and_se(&draws);
    assert!((mean - expected).abs() < 4.0 * se, "{mean} ± {se} vs {expected}");
}

#[test]
fn sampled_norms_do_not_depend_on_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| sample_norms(32, 500, -0.49, 2.05, 3).unwrap());
    let b = four.install(|| sample_norms(32, 500, -0.49, 2.05, 3).unwrap());
    assert_eq!(a, b);
}

#[test]
fn linear_flow_leaves_the_measure_invariant() {
    let mut cfg = InvarianceConfig::new(8, 2000, vec![0.5, 1.0], 4);
    cfg.nonlinearity = Nonlinearity::Off;
    let report = invariance_test(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{}", report.summary());
    assert!(report.failures.is_empty());
}

#[test]
fn invariance_at_time_zero_is_trivial() {
    let cfg = InvarianceConfig::new(8, 500, vec![0.0], 6);
    let report = invariance_test(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{}", report.summary());
}

#[test]
fn growth_quantiles_are_monotone() {
    let mut cfg = GrowthConfig::new(8, 200, vec![0.1, 0.4], 2);
    cfg.dt = 1e-3;
    cfg.eps = vec![0.5, 0.2, 0.1];
    let report = growth_test(&cfg).unwrap();
    assert!(report.monotone, "{}", report.summary());
    for eps in [0.5, 0.2, 0.1] {
        let q: Vec<f64> = report
            .points
            .iter()
            .filter(|p| p.eps == eps)
            .map(|p| p.quantile)
            .collect();
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
    }
}

//! Checks against independent computations: physical-space quadrature,
//! direct sums and closed forms.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex;
use ostrovsky::integrator::{linear_flow, Nonlinearity, SimConfig};
use ostrovsky::measure::{log_density, sample_white_noise};
use ostrovsky::spectral::{
    convolution_direct, energy_components, flow_hamiltonian, from_physical, hamiltonian, l2_norm,
    nonlinear_term, project, to_physical,
};
use ostrovsky::{State, Stepper};
use proptest::prelude::*;

/// `u(x) = Σ_{n≠0} a_n e^{inx}` evaluated pointwise, no FFT involved.
fn eval(modes: &[Complex<f64>], x: f64) -> f64 {
    modes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let n = (k + 1) as f64;
            2.0 * (a * Complex::from_polar(1.0, n * x)).re
        })
        .sum()
}

fn eval_with(modes: &[Complex<f64>], x: f64, multiplier: impl Fn(f64) -> Complex<f64>) -> f64 {
    modes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let n = (k + 1) as f64;
            2.0 * (a * multiplier(n) * Complex::from_polar(1.0, n * x)).re
        })
        .sum()
}

/// Trapezoid rule on `points` nodes: exact for trigonometric polynomials of
/// degree below `points`.
fn periodic_integral(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    let h = 2.0 * PI / points as f64;
    (0..points).map(|j| f(j as f64 * h)).sum::<f64>() * h
}

fn random_state(cutoff: usize, seed: u64) -> State {
    sample_white_noise(cutoff, seed).unwrap()
}

#[test]
fn l2_norm_matches_quadrature() {
    for seed in 0..10 {
        let u = random_state(12, seed);
        let q = periodic_integral(|x| eval(u.modes(), x).powi(2), 64).sqrt();
        assert_abs_diff_eq!(l2_norm(&u), q, epsilon = 1e-11 * q);
    }
}

#[test]
fn energy_components_match_quadrature() {
    for seed in 0..10 {
        let u = random_state(10, 100 + seed);
        let m = u.modes();
        let ux = |x| eval_with(m, x, |n| Complex::new(0.0, n));
        // ∂x⁻¹ on mean-zero data: multiplier 1/(in)
        let anti = |x| eval_with(m, x, |n| Complex::new(0.0, -1.0 / n));
        let grad = 0.5 * periodic_integral(|x| ux(x).powi(2), 64);
        let inv = 0.5 * periodic_integral(|x| anti(x).powi(2), 64);
        let cubic = periodic_integral(|x| eval(m, x).powi(3), 64);
        let (g, a, c) = energy_components(&u);
        assert_abs_diff_eq!(g, grad, epsilon = 1e-10 * grad);
        assert_abs_diff_eq!(a, inv, epsilon = 1e-10 * inv.max(1.0));
        assert_abs_diff_eq!(c, cubic, epsilon = 1e-9 * grad);
        assert_abs_diff_eq!(hamiltonian(&u), grad + inv - cubic / 6.0, epsilon = 1e-9 * grad);
        assert_abs_diff_eq!(flow_hamiltonian(&u), grad - inv + cubic / 6.0, epsilon = 1e-9 * grad);
    }
}

#[test]
fn cosine_hand_values() {
    // u = 2cos x: ∫u_x² = ∫(∂x⁻¹u)² = 4π, ∫u³ = 0
    let u = State::single_mode(4, 1, Complex::new(1.0, 0.0)).unwrap();
    assert_abs_diff_eq!(l2_norm(&u), (4.0 * PI).sqrt(), epsilon = 1e-14);
    assert_abs_diff_eq!(hamiltonian(&u), 4.0 * PI, epsilon = 1e-12);
    assert_abs_diff_eq!(flow_hamiltonian(&u), 0.0, epsilon = 1e-12);
}

#[test]
fn physical_round_trip() {
    for seed in 0..20 {
        let u = random_state(16, 200 + seed);
        let samples = to_physical(&u, 40).unwrap();
        for (j, v) in samples.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 40.0;
            assert_abs_diff_eq!(*v, eval(u.modes(), x), epsilon = 1e-12);
        }
        let back = from_physical(&samples, 16).unwrap();
        for (a, b) in u.modes().iter().zip(back.modes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}

#[test]
fn nonlinear_term_matches_pointwise_product() {
    // −P_N(u u_x) from the quadrature of u·u_x·e^{-inx}
    let u = random_state(6, 7);
    let f = nonlinear_term(&u);
    for n in 1..=6 {
        let nf = n as f64;
        let ux = |x| eval_with(u.modes(), x, |k| Complex::new(0.0, k));
        let re = periodic_integral(|x| eval(u.modes(), x) * ux(x) * (nf * x).cos(), 64) / (2.0 * PI);
        let im = -periodic_integral(|x| eval(u.modes(), x) * ux(x) * (nf * x).sin(), 64) / (2.0 * PI);
        let a = f.mode(n);
        assert_abs_diff_eq!(a.re, -re, epsilon = 1e-12);
        assert_abs_diff_eq!(a.im, -im, epsilon = 1e-12);
    }
}

#[test]
fn fft_and_direct_convolution_agree() {
    for seed in 0..100 {
        let u = random_state(16, 300 + seed);
        let fast = nonlinear_term(&u);
        let slow = convolution_direct(&u).unwrap();
        for (a, b) in fast.modes().iter().zip(slow.modes()) {
            assert!((a - b).norm() < 1e-12, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn nonlinear_term_is_energy_neutral() {
    // Re Σ conj(a_n) F_n = 0: P_N(u u_x) is orthogonal to u
    for seed in 0..20 {
        let u = random_state(24, 400 + seed);
        let f = nonlinear_term(&u);
        let pairing: f64 = u.modes().iter().zip(f.modes()).map(|(a, b)| (a.conj() * b).re).sum();
        assert!(pairing.abs() < 1e-11, "{pairing}");
    }
}

#[test]
fn linear_flow_is_a_group() {
    // phases reach m(32)·0.75 ≈ 2.5e4 rad, so rounding is ~1e-11
    let u = random_state(32, 5);
    let a = linear_flow(&linear_flow(&u, 0.3), 0.45);
    let b = linear_flow(&u, 0.75);
    for (x, y) in a.modes().iter().zip(b.modes()) {
        assert!((x - y).norm() < 1e-10);
    }
    let back = linear_flow(&b, -0.75);
    for (x, y) in back.modes().iter().zip(u.modes()) {
        assert!((x - y).norm() < 1e-10);
    }
}

#[test]
fn reversibility_through_reflection() {
    // u(x, t) ↦ u(−x, −t) maps solutions to solutions; in Fourier the
    // reflection is conjugation of every mode
    let mut stepper = Stepper::new(16, Nonlinearity::On);
    for seed in 0..5 {
        let u0 = random_state(16, 500 + seed).scale(0.3);
        let dt = 1e-4;
        let forward = stepper.integrate(&u0, &[0.1], dt, None).unwrap();
        let back = stepper
            .integrate(&forward[0].reflect(), &[0.1], dt, None)
            .unwrap()[0]
            .reflect();
        let err = u0
            .modes()
            .iter()
            .zip(back.modes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "seed {seed}: {err}");
    }
}

#[test]
fn truncated_flow_conserves_both_invariants() {
    let u0 = random_state(8, 11).scale(0.2);
    let mut config = SimConfig::new(8, 1e-4, 1.0);
    config.snapshot_stride = 1000;
    let traj = ostrovsky::integrator::evolve(&u0, &config).unwrap();
    let d = ostrovsky::integrator::drift(&traj);
    assert!(d.l2 < 1e-10, "{d:?}");
    assert!(d.hamiltonian < 1e-8, "{d:?}");
    assert_eq!(d.mean, 0.0);
}

#[test]
fn projection_onto_low_modes() {
    let u = random_state(16, 9);
    let p = project(&u, 5).unwrap();
    assert_eq!(p.cutoff(), 16);
    assert!(p.modes()[5..].iter().all(|a| a.norm() == 0.0));
    assert_eq!(&p.modes()[..5], &u.modes()[..5]);
    let pp = project(&p, 5).unwrap();
    assert_eq!(pp, p);
}

fn modes_strategy(cutoff: usize) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), cutoff)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex::new(re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_flow_preserves_density(modes in modes_strategy(20), t in -5.0f64..5.0) {
        let u = State::from_modes(modes).unwrap();
        let v = linear_flow(&u, t);
        prop_assert!((log_density(&u) - log_density(&v)).abs() < 1e-11);
        // m(1) = 0
        prop_assert_eq!(v.mode(1), u.mode(1));
    }

    #[test]
    fn conjugate_symmetry(modes in modes_strategy(10), n in 1i64..=10) {
        let u = State::from_modes(modes).unwrap();
        prop_assert_eq!(u.mode(-n), u.mode(n).conj());
        prop_assert_eq!(u.mode(0), Complex::new(0.0, 0.0));
    }

    #[test]
    fn fft_equals_direct(modes in modes_strategy(16)) {
        let u = State::from_modes(modes).unwrap();
        let fast = nonlinear_term(&u);
        let slow = convolution_direct(&u).unwrap();
        for (a, b) in fast.modes().iter().zip(slow.modes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_step_keeps_l2(modes in modes_strategy(8)) {
        let u = State::from_modes(modes).unwrap().scale(0.1);
        let v = ostrovsky::integrator::step(&u, 1e-3, Nonlinearity::On).unwrap();
        let (a, b) = (l2_norm(&u), l2_norm(&v));
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
    }
}

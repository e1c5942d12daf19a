//! Fourier-side representation of real mean-zero fields on 𝕋 = ℝ/2πℤ.
//!
//! Convention: `f̂(n) = (1/2π) ∫ f(x) e^{-inx} dx`, so `u(x) = Σ_{n≠0} a_n e^{inx}`
//! and `∫|u|² = 2π Σ_{n≠0} |a_n|²`. Only `a_1..a_N` are stored; `a_{-n}` is
//! the conjugate and `a_0` is identically zero.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::{FromPrimitive, Num, Zero};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest cutoff accepted by [`convolution_direct`].
pub const DIRECT_CONVOLUTION_BOUND: usize = 64;

/// Truncated spectrum of a real, mean-zero periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState<T> {
    modes: Vec<Complex<T>>,
}

impl<T: Real> SpectralState<T> {
    pub fn zeros(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff { got: 0, min: 1 });
        }
        Ok(Self {
            modes: vec![Complex::zero(); cutoff],
        })
    }

    /// Builds a state from `a_1..a_N`.
    pub fn from_modes(modes: Vec<Complex<T>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidCutoff { got: 0, min: 1 });
        }
        if modes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite("spectral state"));
        }
        Ok(Self { modes })
    }

    /// State with a single nonzero pair `a_{±n}`.
    pub fn single_mode(cutoff: usize, n: usize, amplitude: Complex<T>) -> Result<Self> {
        let mut state = Self::zeros(cutoff)?;
        if n == 0 || n > cutoff {
            return Err(Error::InvalidParameter(format!(
                "mode {n} outside 1..={cutoff}"
            )));
        }
        state.modes[n - 1] = amplitude;
        Ok(state)
    }

    pub(crate) fn from_modes_unchecked(modes: Vec<Complex<T>>) -> Self {
        Self { modes }
    }

    pub fn cutoff(&self) -> usize {
        self.modes.len()
    }

    /// `a_1..a_N`.
    pub fn modes(&self) -> &[Complex<T>] {
        &self.modes
    }

    pub fn into_modes(self) -> Vec<Complex<T>> {
        self.modes
    }

    /// `a_n` for any integer `n`, with the Hermitian extension and `a_0 = 0`.
    pub fn mode(&self, n: i64) -> Complex<T> {
        let k = n.unsigned_abs() as usize;
        if k == 0 || k > self.modes.len() {
            return Complex::zero();
        }
        let a = self.modes[k - 1];
        if n > 0 {
            a
        } else {
            a.conj()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// `Σ_{n≥1} |a_n|²`.
    pub fn energy(&self) -> T {
        self.modes.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Spectrum of the reflected field `u(-x)`.
    pub fn reflect(&self) -> Self {
        Self::from_modes_unchecked(self.modes.iter().map(|a| a.conj()).collect())
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::from_modes_unchecked(self.modes.iter().map(|a| a * factor).collect())
    }

    pub fn cast<U: Real>(&self) -> SpectralState<U> {
        SpectralState::from_modes_unchecked(
            self.modes
                .iter()
                .map(|a| Complex::new(U::lit(a.re.as_f64()), U::lit(a.im.as_f64())))
                .collect(),
        )
    }
}

/// `m(n) = n³ - 1/n`, the symbol of the linear part (`â_t = -i m(n) â + …`).
///
/// Generic over any numeric type with exact integer embedding, so the same
/// definition serves floats and rationals.
pub fn dispersion<T: Num + FromPrimitive>(n: i64) -> Result<T> {
    if n == 0 {
        return Err(Error::ZeroFrequency("the dispersion symbol"));
    }
    let cube = T::from_i64(n * n * n).expect("n³ representable");
    let inv = T::one() / T::from_i64(n).expect("n representable");
    Ok(cube - inv)
}

/// `m(1..N)`, extended to negative frequencies by oddness.
#[derive(Debug, Clone)]
pub struct DispersionTable<T> {
    values: Vec<T>,
}

impl<T: Real> DispersionTable<T> {
    pub fn new(cutoff: usize) -> Self {
        let values = (1..=cutoff as i64)
            .map(|n| dispersion::<T>(n).expect("nonzero"))
            .collect();
        Self { values }
    }

    pub fn cutoff(&self) -> usize {
        self.values.len()
    }

    /// `m(1..N)`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, n: i64) -> Result<T> {
        if n == 0 {
            return Err(Error::ZeroFrequency("the dispersion table"));
        }
        let k = n.unsigned_abs() as usize;
        let v = *self.values.get(k - 1).ok_or(Error::InvalidParameter(format!(
            "frequency {n} beyond cutoff {}",
            self.values.len()
        )))?;
        Ok(if n > 0 { v } else { -v })
    }
}

/// Smallest 5-smooth integer `≥ min`.
pub(crate) fn smooth_length(min: usize) -> usize {
    let mut len = min.max(1);
    loop {
        let mut r = len;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return len;
        }
        len += 1;
    }
}

/// Real-data transform pair on `len` points with reusable buffers.
pub(crate) struct Grid<T: Real> {
    len: usize,
    forward: Arc<dyn RealToComplex<T>>,
    inverse: Arc<dyn ComplexToReal<T>>,
    /// Samples `u(x_j)`.
    values: Vec<T>,
    /// Coefficients `0..=len/2`.
    spectrum: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Grid<T> {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = RealFftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch = vec![Complex::zero(); forward.get_scratch_len().max(inverse.get_scratch_len())];
        Self {
            len,
            values: forward.make_input_vec(),
            spectrum: forward.make_output_vec(),
            forward,
            inverse,
            scratch,
        }
    }

    /// Samples `Σ_{0<|n|≤N} a_n e^{inx_j}` into `values`.
    fn synthesize(&mut self, modes: &[Complex<T>]) {
        debug_assert!(2 * modes.len() < self.len);
        self.spectrum.iter_mut().for_each(|z| *z = Complex::zero());
        self.spectrum[1..=modes.len()].copy_from_slice(modes);
        self.inverse
            .process_with_scratch(&mut self.spectrum, &mut self.values, &mut self.scratch)
            .expect("hermitian input with real end points");
    }

    /// Coefficients `(1/len) Σ_j u(x_j) e^{-inx_j}` of `values` into `spectrum`.
    fn analyze(&mut self) {
        self.forward
            .process_with_scratch(&mut self.values, &mut self.spectrum, &mut self.scratch)
            .expect("buffer lengths match the plan");
        let inv = T::one() / T::from_index(self.len);
        self.spectrum.iter_mut().for_each(|z| *z = *z * inv);
    }
}

/// Samples of the field on `x_j = 2πj/M`, `j = 0..M`.
pub fn to_physical<T: Real>(state: &SpectralState<T>, gridpoints: usize) -> Result<Vec<T>> {
    let required = 2 * state.cutoff() + 2;
    if gridpoints < required {
        return Err(Error::GridTooSmall {
            gridpoints,
            cutoff: state.cutoff(),
            required,
        });
    }
    let mut grid = Grid::new(gridpoints);
    grid.synthesize(state.modes());
    Ok(grid.values.clone())
}

/// Inverse of [`to_physical`]: keeps modes `1..=cutoff`, drops the mean.
pub fn from_physical<T: Real>(samples: &[T], cutoff: usize) -> Result<SpectralState<T>> {
    let required = 2 * cutoff + 2;
    if samples.len() < required {
        return Err(Error::GridTooSmall {
            gridpoints: samples.len(),
            cutoff,
            required,
        });
    }
    let mut grid = Grid::new(samples.len());
    grid.values.copy_from_slice(samples);
    grid.analyze();
    SpectralState::from_modes(grid.spectrum[1..=cutoff].to_vec())
}

/// Evaluates `-P_N(u u_x)` by a zero-padded transform of length `≥ 2(2N+1)`.
///
/// Uses `u u_x = (u²/2)_x`: one synthesis, one pointwise square, one analysis.
pub struct NonlinearTerm<T: Real> {
    cutoff: usize,
    grid: Grid<T>,
}

impl<T: Real> NonlinearTerm<T> {
    pub fn new(cutoff: usize) -> Self {
        Self {
            cutoff,
            grid: Grid::new(padded_length(cutoff)),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Writes `-P_N(u u_x)` for `modes = a_1..a_N` into `out`.
    pub fn eval_into(&mut self, modes: &[Complex<T>], out: &mut [Complex<T>]) {
        assert_eq!(modes.len(), self.cutoff);
        assert_eq!(out.len(), self.cutoff);
        self.grid.synthesize(modes);
        let half = T::lit(0.5);
        for x in self.grid.values.iter_mut() {
            *x = half * *x * *x;
        }
        self.grid.analyze();
        for (k, o) in out.iter_mut().enumerate() {
            let n = T::from_index(k + 1);
            // -(i n) ŵ_n
            let w = self.grid.spectrum[k + 1];
            *o = Complex::new(n * w.im, -n * w.re);
        }
    }

    pub fn eval(&mut self, state: &SpectralState<T>) -> SpectralState<T> {
        let mut out = vec![Complex::zero(); self.cutoff];
        self.eval_into(state.modes(), &mut out);
        SpectralState::from_modes_unchecked(out)
    }

    /// `∫ u³ dx`, exact for the truncated field (grid ≥ 3N+1 points).
    pub fn cubic_integral(&mut self, modes: &[Complex<T>]) -> T {
        self.grid.synthesize(modes);
        let sum = self
            .grid
            .values
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x * x);
        sum * T::TAU() / T::from_index(self.grid.len)
    }

    /// `max_j |u(x_j)|` on the padded grid.
    pub fn max_abs(&mut self, modes: &[Complex<T>]) -> T {
        self.grid.synthesize(modes);
        self.grid
            .values
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }
}

/// Transform length used for the quadratic term at cutoff `N`.
pub fn padded_length(cutoff: usize) -> usize {
    // even lengths take the fast half-length path of the real transform
    let mut len = smooth_length(2 * (2 * cutoff + 1));
    while len % 2 == 1 {
        len = smooth_length(len + 1);
    }
    len
}

/// `-P_N(u u_x)`; mode 0 is not represented and therefore exactly zero.
pub fn nonlinear_term<T: Real>(state: &SpectralState<T>) -> SpectralState<T> {
    NonlinearTerm::new(state.cutoff()).eval(state)
}

/// Same contract as [`nonlinear_term`] by the explicit double sum
/// `−(in/2) Σ_{n₁+n₂=n} a_{n₁} a_{n₂}`.
pub fn convolution_direct<T: Real>(state: &SpectralState<T>) -> Result<SpectralState<T>> {
    convolution_direct_bounded(state, DIRECT_CONVOLUTION_BOUND)
}

pub fn convolution_direct_bounded<T: Real>(
    state: &SpectralState<T>,
    bound: usize,
) -> Result<SpectralState<T>> {
    let cutoff = state.cutoff();
    if cutoff > bound {
        return Err(Error::CutoffTooLarge { cutoff, bound });
    }
    let big_n = cutoff as i64;
    let half = T::lit(0.5);
    let modes = (1..=big_n)
        .map(|n| {
            let mut sum = Complex::zero();
            for n1 in (n - big_n)..=big_n {
                let n2 = n - n1;
                if n1 == 0 || n2 == 0 || n2.abs() > big_n {
                    continue;
                }
                sum = sum + state.mode(n1) * state.mode(n2);
            }
            // -(i n / 2) * sum
            let c = T::from_i64(n).expect("n") * half;
            Complex::new(c * sum.im, -c * sum.re)
        })
        .collect();
    Ok(SpectralState::from_modes_unchecked(modes))
}

/// `P_m`: zeroes every mode with `|n| > m`.
pub fn project<T: Real>(state: &SpectralState<T>, m: usize) -> Result<SpectralState<T>> {
    if m == 0 {
        return Err(Error::InvalidCutoff { got: 0, min: 1 });
    }
    let modes = state
        .modes()
        .iter()
        .enumerate()
        .map(|(k, &a)| if k < m { a } else { Complex::zero() })
        .collect();
    Ok(SpectralState::from_modes_unchecked(modes))
}

/// `‖u‖_{L²} = (4π Σ_{n≥1} |a_n|²)^{1/2}`.
pub fn l2_norm<T: Real>(state: &SpectralState<T>) -> T {
    (T::lit(4.0) * T::PI() * state.energy()).sqrt()
}

/// The three integrals `(½∫u_x², ½∫(∂x⁻¹u)², ∫u³)` of the truncated field.
pub fn energy_components<T: Real>(state: &SpectralState<T>) -> (T, T, T) {
    energy_components_with(state, &mut NonlinearTerm::new(state.cutoff()))
}

pub(crate) fn energy_components_with<T: Real>(
    state: &SpectralState<T>,
    work: &mut NonlinearTerm<T>,
) -> (T, T, T) {
    let two_pi = T::TAU();
    let (mut grad, mut anti) = (T::zero(), T::zero());
    for (k, a) in state.modes().iter().enumerate() {
        let n2 = T::from_index((k + 1) * (k + 1));
        let e = a.norm_sqr();
        grad = grad + n2 * e;
        anti = anti + e / n2;
    }
    (two_pi * grad, two_pi * anti, work.cubic_integral(state.modes()))
}

/// `H(u) = ½∫u_x² + ½∫(∂x⁻¹u)² − (1/6)∫u³` in the form usually quoted
/// for the equation.
///
/// With `m(n) = n³ − 1/n` this functional is *not* constant along the flow;
/// see [`flow_hamiltonian`] for the one that is.
pub fn hamiltonian<T: Real>(state: &SpectralState<T>) -> T {
    let (grad, anti, cubic) = energy_components(state);
    grad + anti - cubic / T::lit(6.0)
}

/// `½∫u_x² − ½∫(∂x⁻¹u)² + (1/6)∫u³`, the Hamiltonian generating
/// `u_t = −∂x δH/δu` for `u_t − u_xxx + ∂x⁻¹u + u u_x = 0`; conserved by the
/// truncated flow since `P_N` is self-adjoint.
pub fn flow_hamiltonian<T: Real>(state: &SpectralState<T>) -> T {
    let (grad, anti, cubic) = energy_components(state);
    grad - anti + cubic / T::lit(6.0)
}

pub(crate) fn flow_hamiltonian_with<T: Real>(
    state: &SpectralState<T>,
    work: &mut NonlinearTerm<T>,
) -> T {
    let (grad, anti, cubic) = energy_components_with(state, work);
    grad - anti + cubic / T::lit(6.0)
}

//! Time evolution of the truncated system
//! `â_t = -i m(n) â - P_N(u u_x)^(n)`, `1 ≤ n ≤ N`.
//!
//! The scheme is RK4 applied to the interaction variable
//! `v(t) = e^{i m t} â(t)`, which is integrating-factor RK4 with the phase
//! factors evaluated at absolute times. Snapshots are mapped back with the
//! exact linear propagator, so with the nonlinearity switched off the
//! integrator reproduces [`linear_flow`] bit for bit.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{flow_hamiltonian_with, DispersionTable, NonlinearTerm, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    #[default]
    #[serde(rename = "IFRK4")]
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    #[default]
    On,
    /// Free evolution only.
    Off,
}

impl Nonlinearity {
    pub fn is_on(&self) -> bool {
        *self == Nonlinearity::On
    }
}

/// Parameters of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(rename = "N")]
    pub cutoff: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub scheme: Scheme,
    #[serde(rename = "stride")]
    pub snapshot_stride: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Nonlinearity::is_on")]
    pub nonlinearity: Nonlinearity,
}

impl SimConfig {
    pub fn new(cutoff: usize, dt: f64, horizon: f64) -> Self {
        Self {
            cutoff,
            dt,
            horizon,
            scheme: Scheme::Ifrk4,
            snapshot_stride: 1,
            seed: 0,
            nonlinearity: Nonlinearity::On,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(Error::InvalidCutoff {
                got: self.cutoff,
                min: 2,
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be > 0", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "T = {} must be >= 0",
                self.horizon
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Recorded states of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub config: SimConfig,
    pub times: Vec<T>,
    pub snapshots: Vec<SpectralState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn initial(&self) -> &SpectralState<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &SpectralState<T> {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    fn push(&mut self, t: T, state: SpectralState<T>) {
        self.times.push(t);
        self.snapshots.push(state);
    }
}

/// A failed run: the error and everything recorded before it.
#[derive(Debug, Clone)]
pub struct EvolveFailure<T> {
    pub error: Error,
    pub partial: Trajectory<T>,
}

impl<T> std::fmt::Display for EvolveFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: std::fmt::Debug> std::error::Error for EvolveFailure<T> {}

/// `â_n ↦ e^{-i m(n) t} â_n`.
pub fn linear_flow<T: Real>(state: &SpectralState<T>, t: T) -> SpectralState<T> {
    let table = DispersionTable::new(state.cutoff());
    let mut modes = state.modes().to_vec();
    rotate(&mut modes, table.values(), t);
    SpectralState::from_modes_unchecked(modes)
}

fn rotate<T: Real>(modes: &mut [Complex<T>], symbol: &[T], t: T) {
    for (a, &m) in modes.iter_mut().zip(symbol) {
        let (s, c) = (m * t).sin_cos();
        *a = *a * Complex::new(c, -s);
    }
}

/// `0.5 / (N max|u|)`: advective bound for the nonlinear stage.
pub fn cfl_bound<T: Real>(state: &SpectralState<T>) -> T {
    cfl_bound_with(state, &mut NonlinearTerm::new(state.cutoff()))
}

fn cfl_bound_with<T: Real>(state: &SpectralState<T>, work: &mut NonlinearTerm<T>) -> T {
    let peak = work.max_abs(state.modes());
    if peak == T::zero() {
        T::infinity()
    } else {
        T::lit(0.5) / (T::from_index(state.cutoff()) * peak)
    }
}

/// Reusable integrator for one cutoff.
pub struct Stepper<T: Real> {
    table: DispersionTable<T>,
    nonlinear: NonlinearTerm<T>,
    nonlinearity: Nonlinearity,
    stage: Vec<Complex<T>>,
    field: Vec<Complex<T>>,
    k: [Vec<Complex<T>>; 4],
    phases: [Vec<Complex<T>>; 3],
    /// `e^{-imh/2}` for the step `half_step.0 = h`.
    half_step: (T, Vec<Complex<T>>),
}

impl<T: Real> Stepper<T> {
    pub fn new(cutoff: usize, nonlinearity: Nonlinearity) -> Self {
        let zeros = || vec![Complex::zero(); cutoff];
        Self {
            table: DispersionTable::new(cutoff),
            nonlinear: NonlinearTerm::new(cutoff),
            nonlinearity,
            stage: zeros(),
            field: zeros(),
            k: [zeros(), zeros(), zeros(), zeros()],
            phases: [zeros(), zeros(), zeros()],
            half_step: (T::nan(), zeros()),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.table.cutoff()
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    fn check_cutoff(&self, state: &SpectralState<T>) -> Result<()> {
        if state.cutoff() != self.cutoff() {
            return Err(Error::ShapeMismatch {
                expected: self.cutoff(),
                got: state.cutoff(),
            });
        }
        Ok(())
    }

    /// Interaction-picture right-hand side `e^{imt} N(e^{-imt} v)` of `stage`
    /// into `k[slot]`, with `phase[slot] = e^{-imt}` precomputed.
    fn interaction_rhs(&mut self, phase: usize, slot: usize) {
        let rot = &self.phases[phase];
        for ((f, v), r) in self.field.iter_mut().zip(&self.stage).zip(rot) {
            *f = v * r;
        }
        let out = &mut self.k[slot];
        self.nonlinear.eval_into(&self.field, out);
        for (o, r) in out.iter_mut().zip(rot) {
            *o = *o * r.conj();
        }
    }

    /// `e^{-imt}`, `e^{-im(t+h/2)}` and `e^{-im(t+h)}`; the later two by
    /// rotating the first with the cached `e^{-imh/2}`.
    fn fill_phases(&mut self, t: T, h: T) {
        let symbol = self.table.values();
        if self.half_step.0 != h {
            let half = h * T::lit(0.5);
            for (r, &m) in self.half_step.1.iter_mut().zip(symbol) {
                let (s, c) = (m * half).sin_cos();
                *r = Complex::new(c, -s);
            }
            self.half_step.0 = h;
        }
        let [now, mid, end] = &mut self.phases;
        for ((((p, q), e), r), &m) in now
            .iter_mut()
            .zip(mid.iter_mut())
            .zip(end.iter_mut())
            .zip(&self.half_step.1)
            .zip(symbol)
        {
            let (s, c) = (m * t).sin_cos();
            *p = Complex::new(c, -s);
            *q = *p * r;
            *e = *q * r;
        }
    }

    /// One RK4 step of the interaction variable from `t` to `t + h`.
    fn advance(&mut self, v: &mut [Complex<T>], t: T, h: T) {
        if self.nonlinearity == Nonlinearity::Off {
            return;
        }
        let half = h * T::lit(0.5);
        self.fill_phases(t, h);

        self.stage.copy_from_slice(v);
        self.interaction_rhs(0, 0);
        for i in 0..v.len() {
            self.stage[i] = v[i] + self.k[0][i] * half;
        }
        self.interaction_rhs(1, 1);
        for i in 0..v.len() {
            self.stage[i] = v[i] + self.k[1][i] * half;
        }
        self.interaction_rhs(1, 2);
        for i in 0..v.len() {
            self.stage[i] = v[i] + self.k[2][i] * h;
        }
        self.interaction_rhs(2, 3);

        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        for i in 0..v.len() {
            let incr = self.k[0][i] + (self.k[1][i] + self.k[2][i]) * two + self.k[3][i];
            v[i] = v[i] + incr * sixth;
        }
    }

    /// Maps the interaction variable at time `t` to the state.
    fn physical(&self, v: &[Complex<T>], t: T) -> SpectralState<T> {
        let mut modes = v.to_vec();
        rotate(&mut modes, self.table.values(), t);
        SpectralState::from_modes_unchecked(modes)
    }

    /// One IF-RK4 step of size `dt`.
    pub fn step(&mut self, state: &SpectralState<T>, dt: T) -> Result<SpectralState<T>> {
        self.check_cutoff(state)?;
        let mut v = state.modes().to_vec();
        self.advance(&mut v, T::zero(), dt);
        let next = self.physical(&v, dt);
        if !next.is_finite() {
            return Err(Error::BlowUp { time: dt.as_f64() });
        }
        Ok(next)
    }

    /// Right-hand side `F(a) = -i m a - P_N(u u_x)` of the truncated system.
    pub fn vector_field(&mut self, state: &SpectralState<T>) -> Result<SpectralState<T>> {
        self.check_cutoff(state)?;
        let mut out = vec![Complex::zero(); self.cutoff()];
        if self.nonlinearity == Nonlinearity::On {
            self.nonlinear.eval_into(state.modes(), &mut out);
        }
        for ((o, a), &m) in out.iter_mut().zip(state.modes()).zip(self.table.values()) {
            // -i m a
            *o = *o + Complex::new(m * a.im, -m * a.re);
        }
        Ok(SpectralState::from_modes_unchecked(out))
    }

    /// Central-difference divergence of [`Self::vector_field`] in the real
    /// coordinates `(Re a_1, Im a_1, …, Re a_N, Im a_N)`, with step
    /// `h_rel · max(1, max_i |x_i|)`.
    pub fn divergence_estimate(&mut self, state: &SpectralState<T>, h_rel: T) -> Result<T> {
        self.check_cutoff(state)?;
        let scale = state
            .modes()
            .iter()
            .fold(T::one(), |acc, a| acc.max(a.re.abs()).max(a.im.abs()));
        let h = h_rel * scale;
        let mut div = T::zero();
        let mut probe = state.modes().to_vec();
        for k in 0..self.cutoff() {
            for imag in [false, true] {
                let original = probe[k];
                let bump = if imag {
                    Complex::new(T::zero(), h)
                } else {
                    Complex::new(h, T::zero())
                };
                probe[k] = original + bump;
                let plus = self.vector_field(&SpectralState::from_modes_unchecked(probe.clone()))?;
                probe[k] = original - bump;
                let minus = self.vector_field(&SpectralState::from_modes_unchecked(probe.clone()))?;
                probe[k] = original;
                let diff = plus.modes()[k] - minus.modes()[k];
                let component = if imag { diff.im } else { diff.re };
                div = div + component / (h + h);
            }
        }
        Ok(div)
    }

    /// Steps `initial` through `stops` (ascending, ≥ 0), returning the state
    /// at each stop. Every segment is covered with steps of `dt`, the last
    /// one shortened to land exactly on the stop. `observe` sees the state
    /// after every step.
    pub fn integrate(
        &mut self,
        initial: &SpectralState<T>,
        stops: &[T],
        dt: T,
        mut observe: Option<&mut dyn FnMut(T, &SpectralState<T>)>,
    ) -> Result<Vec<SpectralState<T>>> {
        self.check_cutoff(initial)?;
        if stops.windows(2).any(|w| w[1] < w[0]) || stops.iter().any(|&t| t < T::zero()) {
            return Err(Error::InvalidParameter("stop times must be ascending and >= 0".into()));
        }
        let mut guard = DoublingGuard::new(initial, dt, self.nonlinearity);
        let mut v = initial.modes().to_vec();
        let mut t = T::zero();
        let mut out = Vec::with_capacity(stops.len());
        for &stop in stops {
            for (t0, h) in segment_steps(t, stop, dt) {
                self.advance(&mut v, t0, h);
                let tn = if t0 + h == stop { stop } else { t0 + h };
                if v.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
                    return Err(Error::BlowUp { time: tn.as_f64() });
                }
                guard.check(&v, tn, self)?;
                if let Some(obs) = observe.as_deref_mut() {
                    obs(tn, &self.physical(&v, tn));
                }
            }
            t = stop;
            out.push(self.physical(&v, stop));
        }
        Ok(out)
    }

    /// Evolves to the configured horizon, recording the initial state, every
    /// `snapshot_stride`-th step and the final state.
    pub fn evolve(
        &mut self,
        state: &SpectralState<T>,
        config: &SimConfig,
    ) -> std::result::Result<Trajectory<T>, EvolveFailure<T>> {
        let mut traj = Trajectory {
            config: config.clone(),
            times: vec![],
            snapshots: vec![],
        };
        let fail = |error, partial| Err(EvolveFailure { error, partial });
        if let Err(e) = config.validate().and_then(|_| {
            if config.nonlinearity != self.nonlinearity {
                return Err(Error::InvalidParameter(
                    "config and stepper disagree on the nonlinearity".into(),
                ));
            }
            self.check_cutoff(state)
        }) {
            return fail(e, traj);
        }
        let dt = T::lit(config.dt);
        let horizon = T::lit(config.horizon);
        if self.nonlinearity == Nonlinearity::On {
            let bound = cfl_bound_with(state, &mut self.nonlinear);
            if dt > bound {
                return fail(
                    Error::Cfl {
                        dt: config.dt,
                        bound: bound.as_f64(),
                    },
                    traj,
                );
            }
        }
        traj.push(T::zero(), state.clone());

        let mut guard = DoublingGuard::new(state, dt, self.nonlinearity);
        let mut v = state.modes().to_vec();
        let steps: Vec<_> = segment_steps(T::zero(), horizon, dt).collect();
        let count = steps.len();
        for (i, (t0, h)) in steps.into_iter().enumerate() {
            self.advance(&mut v, t0, h);
            let last = i + 1 == count;
            let tn = if last { horizon } else { t0 + h };
            if v.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
                return fail(Error::BlowUp { time: tn.as_f64() }, traj);
            }
            if let Err(e) = guard.check(&v, tn, self) {
                return fail(e, traj);
            }
            if last || (i + 1) % config.snapshot_stride == 0 {
                traj.push(tn, self.physical(&v, tn));
            }
        }
        Ok(traj)
    }
}

/// Steps `(t_k, h_k)` covering `[from, to]`: `t_k = from + k·dt`, the final
/// step shortened to end exactly at `to`.
fn segment_steps<T: Real>(from: T, to: T, dt: T) -> impl Iterator<Item = (T, T)> {
    let span = to - from;
    let n = if span <= T::zero() {
        0
    } else {
        // a remainder below 1e-9 dt is absorbed into the previous step
        let q = span / dt;
        let full = (q - T::lit(1e-9)).ceil();
        full.to_usize().unwrap_or(0).max(1)
    };
    (0..n).map(move |k| {
        let t0 = from + dt * T::from_index(k);
        let h = if k + 1 == n { to - t0 } else { dt };
        (t0, h)
    })
}

/// Re-checks the CFL bound whenever the L² norm has doubled.
struct DoublingGuard<T> {
    reference: T,
    dt: T,
    active: bool,
}

impl<T: Real> DoublingGuard<T> {
    fn new(state: &SpectralState<T>, dt: T, nonlinearity: Nonlinearity) -> Self {
        Self {
            reference: state.energy(),
            dt,
            active: nonlinearity == Nonlinearity::On,
        }
    }

    fn check(&mut self, v: &[Complex<T>], t: T, stepper: &mut Stepper<T>) -> Result<()> {
        if !self.active {
            return Ok(());
        }
        let energy = v.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
        if energy > T::lit(4.0) * self.reference {
            let state = stepper.physical(v, t);
            let bound = cfl_bound_with(&state, &mut stepper.nonlinear);
            if self.dt > bound {
                return Err(Error::Cfl {
                    dt: self.dt.as_f64(),
                    bound: bound.as_f64(),
                });
            }
            self.reference = energy;
        }
        Ok(())
    }
}

/// One IF-RK4 step with a freshly built [`Stepper`].
pub fn step<T: Real>(
    state: &SpectralState<T>,
    dt: T,
    nonlinearity: Nonlinearity,
) -> Result<SpectralState<T>> {
    Stepper::new(state.cutoff(), nonlinearity).step(state, dt)
}

pub fn evolve<T: Real>(
    state: &SpectralState<T>,
    config: &SimConfig,
) -> std::result::Result<Trajectory<T>, EvolveFailure<T>> {
    Stepper::new(state.cutoff(), config.nonlinearity).evolve(state, config)
}

pub fn divergence_estimate<T: Real>(state: &SpectralState<T>, h_rel: T) -> Result<T> {
    Stepper::new(state.cutoff(), Nonlinearity::On).divergence_estimate(state, h_rel)
}

/// Relative drift of the conserved quantities along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    /// `max_t |‖u(t)‖ − ‖u(0)‖| / ‖u(0)‖`.
    pub l2: f64,
    /// `max_t |H_N(t) − H_N(0)| / |H_N(0)|` for [`crate::spectral::flow_hamiltonian`].
    pub hamiltonian: f64,
    /// `max_t |â_0(t)|`; zero by construction.
    pub mean: f64,
}

pub fn drift<T: Real>(traj: &Trajectory<T>) -> Drift {
    let first = traj.initial();
    let mut work = NonlinearTerm::new(first.cutoff());
    let l2_0 = crate::spectral::l2_norm(first).as_f64();
    let h0 = flow_hamiltonian_with(first, &mut work).as_f64();
    let rel = |x: f64, x0: f64| {
        if x0 == 0.0 {
            x.abs()
        } else {
            ((x - x0) / x0).abs()
        }
    };
    let mut d = Drift {
        l2: 0.0,
        hamiltonian: 0.0,
        mean: 0.0,
    };
    for s in &traj.snapshots {
        d.l2 = d.l2.max(rel(crate::spectral::l2_norm(s).as_f64(), l2_0));
        d.hamiltonian = d
            .hamiltonian
            .max(rel(flow_hamiltonian_with(s, &mut work).as_f64(), h0));
        d.mean = d.mean.max(s.mode(0).norm().as_f64());
    }
    d
}

//! Short- and long-time behaviour of the visibility exponent.
//!
//! Sign convention: `B(t) = Σ |α|² cos ωt`, so `A(t) = A_∞ − B(t)`.

pub mod bessel;

use rayon::prelude::*;
use serde::Serialize;

pub use bessel::bessel_y0;

use crate::error::{ChainError, Result};
use crate::fit::{linear_fit, quadratic_through_origin, LinearFit};
use crate::linear_modes::{critical_frequency_finite, max_group_velocity, ModeSet};
use crate::model::{critical_frequency_infinite, ChainParams};
use crate::num::Real;
use crate::ramsey::{linear_amplitudes, zigzag_amplitudes, DisplacementAmplitudes, ModeLabel};
use crate::zigzag_modes::zigzag_spectrum;

/// Reference detuning for the one-point calibration of `Ã_∞`.
pub const CALIBRATION_DELTA: f64 = 1e-2;
/// Minimum number of short-time samples for `Γ_fit`.
pub const MIN_FIT_SAMPLES: usize = 50;
/// Largest `ν_t t` allowed in the short-time window.
pub const MAX_FIT_WINDOW: f64 = 0.1;

/// `Γ` from the amplitude sum and, for the linear chain, from the mean frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoForms<T> {
    pub direct: T,
    pub mean_form: Option<T>,
}

fn linear_count<T>(amps: &DisplacementAmplitudes<T>) -> Option<usize> {
    amps.modes.iter().all(|m| matches!(m.label, ModeLabel::Linear(_))).then_some(amps.modes.len())
}

/// `Γ = ½ Σ |α|² ω²` and `(η₀² ν_t / 2)(1/N) Σ ω`.
pub fn gamma_coefficient<T: Real>(amps: &DisplacementAmplitudes<T>) -> TwoForms<T> {
    let half = T::lit(0.5);
    let direct = half * amps.modes.iter().map(|m| m.weight() * m.omega * m.omega).sum::<T>();
    let mean_form = linear_count(amps).map(|n| {
        let mean = amps.modes.iter().map(|m| m.omega).sum::<T>() / T::from_count(n);
        half * amps.eta0 * amps.eta0 * amps.nu_t * mean
    });
    TwoForms { direct, mean_form }
}

/// `A_∞ = Σ |α|²` and `η₀² ν_t (1/N) Σ 1/ω`.
pub fn a_infinity<T: Real>(amps: &DisplacementAmplitudes<T>) -> TwoForms<T> {
    let direct = amps.modes.iter().map(|m| m.weight()).sum::<T>();
    let mean_form = linear_count(amps).map(|n| {
        let mean = amps.modes.iter().map(|m| m.omega.recip()).sum::<T>() / T::from_count(n);
        amps.eta0 * amps.eta0 * amps.nu_t * mean
    });
    TwoForms { direct, mean_form }
}

/// `B(t) = Σ |α|² cos ωt`.
pub fn b_of_t<T: Real>(t: T, amps: &DisplacementAmplitudes<T>) -> T {
    amps.modes.iter().map(|m| m.weight() * (m.omega * t).cos()).sum()
}

/// Linear-chain `Γ` from the transverse spectrum alone.
pub fn gamma_linear<T: Real>(params: &ChainParams<T>) -> Result<T> {
    let set = ModeSet::transverse(params.nu_t, params.n_ions)?;
    let mean = set.frequencies().sum::<T>() / T::from_count(set.len());
    let eta0 = params.eta0();
    Ok(T::lit(0.5) * eta0 * eta0 * params.nu_t * mean)
}

/// Linear-chain `A_∞` from the transverse spectrum alone.
pub fn a_infinity_linear<T: Real>(params: &ChainParams<T>) -> Result<T> {
    let set = ModeSet::transverse(params.nu_t, params.n_ions)?;
    if let Some((idx, _)) = set.modes.iter().find(|(_, w)| *w <= T::zero()) {
        return Err(ChainError::SoftModeSingularity(format!("mode {idx} has zero frequency")));
    }
    let mean = set.frequencies().map(|w| w.recip()).sum::<T>() / T::from_count(set.len());
    let eta0 = params.eta0();
    Ok(eta0 * eta0 * params.nu_t * mean)
}

/// Least-squares `A(t) ≈ Γ_fit t²` over a short-time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaFit<T> {
    pub gamma_fit: T,
    pub residual_norm: T,
}

pub fn gamma_fit<T: Real>(times: &[T], exponent: &[T], nu_t: T) -> Result<GammaFit<T>> {
    if times.len() != exponent.len() {
        return Err(ChainError::invalid("time and exponent arrays differ in length"));
    }
    let positive = times.iter().filter(|t| **t > T::zero()).count();
    if positive < MIN_FIT_SAMPLES {
        return Err(ChainError::invalid(format!(
            "short-time fit needs at least {MIN_FIT_SAMPLES} samples with t > 0, got {positive}"
        )));
    }
    let t_max = times.iter().fold(T::zero(), |a, t| a.max(t.abs()));
    let limit = T::lit(MAX_FIT_WINDOW) * (T::one() + T::lit(1e-9));
    if t_max * nu_t > limit {
        return Err(ChainError::invalid(format!(
            "short-time window too wide: ν_t·t_max = {} exceeds {MAX_FIT_WINDOW}",
            t_max * nu_t
        )));
    }
    let (gamma_fit, residual_norm) = quadratic_through_origin(times, exponent);
    Ok(GammaFit { gamma_fit, residual_norm })
}

/// Samples `A(t)` on `samples` points in `(0, t_fit]` and fits `Γ_fit`.
pub fn gamma_fit_from_amplitudes<T: Real>(
    amps: &DisplacementAmplitudes<T>,
    t_fit: T,
    samples: usize,
) -> Result<GammaFit<T>> {
    let times: Vec<T> = (1..=samples).map(|i| t_fit * T::from_count(i) / T::from_count(samples)).collect();
    let exponent: Vec<T> = times.par_iter().map(|&t| amps.exponent_a(t)).collect();
    gamma_fit(&times, &exponent, amps.nu_t)
}

/// Centered-difference derivative with one Richardson step.
fn richardson<T: Real>(f: impl Fn(T) -> Result<T>, x: T, h: T) -> Result<T> {
    let two = T::lit(2.0);
    let d = |h: T| -> Result<T> { Ok((f(x + h)? - f(x - h)?) / (two * h)) };
    let coarse = d(h)?;
    let fine = d(h / two)?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaDerivativeScan<T> {
    pub deltas: Vec<T>,
    pub derivatives: Vec<T>,
    /// `dΓ/dΔ ≈ a + b ln Δ`.
    pub a: T,
    pub b: T,
    pub r_squared: T,
    pub b_stderr: T,
    /// Analytic value `−¼ η₀² ν_t ν_t^(c) / (π h)` at `ν_t = ν_t^(c)`.
    pub b_analytic: T,
}

/// Numerical `dΓ/dΔ` on a positive detuning grid and its fit against `ln Δ`.
pub fn gamma_derivative_scan<T: Real>(n_ions: usize, eta_c: T, deltas: &[T]) -> Result<GammaDerivativeScan<T>> {
    if deltas.len() < 6 {
        return Err(ChainError::invalid(format!("derivative scan needs at least 6 detunings, got {}", deltas.len())));
    }
    if deltas.iter().any(|d| !(*d > T::zero())) {
        return Err(ChainError::invalid("derivative scan needs Δ > 0"));
    }
    let gamma_at = |d: T| gamma_linear(&ChainParams::from_delta(n_ions, d, eta_c, T::zero())?);
    let derivatives =
        deltas.par_iter().map(|&d| richardson(gamma_at, d, d / T::lit(100.0))).collect::<Result<Vec<T>>>()?;
    let logs: Vec<T> = deltas.iter().map(|d| d.ln()).collect();
    let fit = linear_fit(&logs, &derivatives)?;
    let nu_c = critical_frequency_infinite::<T>();
    let h = T::LN_2().sqrt();
    // η₀² ν_t = η^(c)² ν_t^(c) for every ν_t
    let b_analytic = -eta_c * eta_c * nu_c * nu_c / (T::lit(4.0) * T::PI() * h);
    Ok(GammaDerivativeScan {
        deltas: deltas.to_vec(),
        derivatives,
        a: fit.intercept,
        b: fit.slope,
        r_squared: fit.r_squared,
        b_stderr: fit.slope_stderr,
        b_analytic,
    })
}

/// `Ã_∞(Δ) = −s ln Δ + c` with `s = η₀² ν_t / (2π h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AInfinityAnalytic<T> {
    pub slope: T,
    pub constant: T,
    pub delta_ref: T,
}

impl<T: Real> AInfinityAnalytic<T> {
    pub fn eval(&self, delta: T) -> T {
        -self.slope * delta.ln() + self.constant
    }
}

/// Analytic `Ã_∞` with `c` matched to the numerical `A_∞` at `delta_ref`.
pub fn a_infinity_analytic<T: Real>(params: &ChainParams<T>, delta_ref: T) -> Result<AInfinityAnalytic<T>> {
    if !(delta_ref > T::zero()) {
        return Err(ChainError::invalid("calibration detuning must be positive"));
    }
    let nu_c = critical_frequency_infinite::<T>();
    let h = T::LN_2().sqrt();
    let slope = params.eta_c * params.eta_c * nu_c / (T::TAU() * h);
    let reference = ChainParams::from_delta(params.n_ions, delta_ref, params.eta_c, params.theta)?;
    let numeric = a_infinity_linear(&reference)?;
    Ok(AInfinityAnalytic { slope, constant: numeric + slope * delta_ref.ln(), delta_ref })
}

/// `B̃(t) = −(η₀² ν_t / 2h) Y₀(δ t)`, the continuum estimate of `B(t)`.
pub fn b_analytic<T: Real>(t: T, params: &ChainParams<T>) -> Result<T> {
    if !(t > T::zero()) {
        return Err(ChainError::invalid(format!("B̃(t) needs t > 0, got {t}")));
    }
    let delta = params.gap().delta()?;
    if !(delta > T::zero()) {
        return Err(ChainError::UnstableLinearPhase("B̃(t) needs Δ > 0".into()));
    }
    let eta0 = params.eta0();
    let h = T::LN_2().sqrt();
    Ok(-eta0 * eta0 * params.nu_t / (T::lit(2.0) * h) * bessel_y0(delta * t)?)
}

/// Continuum approximation of the visibility, `exp(−Ã_∞ + B̃(t))`.
pub fn approximate_visibility<T: Real>(t: T, params: &ChainParams<T>, a_inf: &AInfinityAnalytic<T>) -> Result<T> {
    Ok((-a_inf.eval(params.delta()) + b_analytic(t, params)?).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RevivalTime<T> {
    pub t_star: T,
    pub v_max: T,
    pub k_star: T,
}

/// `t* = N a / v_max`.
pub fn revival_time<T: Real>(n_ions: usize, nu_t: T) -> Result<RevivalTime<T>> {
    let g = max_group_velocity(nu_t, n_ions)?;
    Ok(RevivalTime { t_star: T::from_count(n_ions) / g.v_max, v_max: g.v_max, k_star: g.k_star })
}

/// Heuristic burst detector on a sampled visibility trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RevivalDetector {
    /// Trailing window length (1/ω₀) of the peak-to-peak amplitude.
    pub window: f64,
    /// Detection threshold as a multiple of the baseline.
    pub threshold: f64,
    /// Baseline window `[start, end]·t*`.
    pub baseline_start: f64,
    pub baseline_end: f64,
}

impl Default for RevivalDetector {
    fn default() -> Self {
        Self { window: 50.0, threshold: 2.0, baseline_start: 0.5, baseline_end: 0.85 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RevivalDetection<T> {
    pub time: T,
    pub amplitude: T,
    pub baseline: T,
}

impl RevivalDetector {
    /// Peak-to-peak of `values` over the trailing window ending at each sample.
    pub fn rolling_amplitude<T: Real>(&self, times: &[T], values: &[T]) -> Result<Vec<T>> {
        let dt = uniform_step(times)?;
        let span = (self.window / dt.to_f64_lossy()).round().max(1.0) as usize;
        Ok((0..values.len())
            .into_par_iter()
            .map(|i| {
                let lo = i.saturating_sub(span);
                let w = &values[lo..=i];
                let max = w.iter().fold(w[0], |a, b| a.max(*b));
                let min = w.iter().fold(w[0], |a, b| a.min(*b));
                max - min
            })
            .collect())
    }

    /// First time after the baseline window where the rolling amplitude
    /// exceeds `threshold ×` its baseline median.
    pub fn detect<T: Real>(&self, times: &[T], values: &[T], t_star: T) -> Result<Option<RevivalDetection<T>>> {
        if times.len() != values.len() {
            return Err(ChainError::invalid("time and value arrays differ in length"));
        }
        let amp = self.rolling_amplitude(times, values)?;
        let start = t_star * T::lit(self.baseline_start);
        let end = t_star * T::lit(self.baseline_end);
        let mut base: Vec<T> =
            times.iter().zip(&amp).filter(|(t, _)| **t >= start && **t <= end).map(|(_, a)| *a).collect();
        if base.is_empty() {
            return Err(ChainError::invalid("trace does not cover the revival baseline window"));
        }
        base.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let baseline = base[base.len() / 2];
        let limit = baseline * T::lit(self.threshold);
        Ok(times.iter().zip(&amp).find(|(t, a)| **t > end && **a > limit).map(|(t, a)| RevivalDetection {
            time: *t,
            amplitude: *a,
            baseline,
        }))
    }
}

/// Spacing of a uniform grid; errors on fewer than two points or a non-uniform grid.
pub fn uniform_step<T: Real>(times: &[T]) -> Result<T> {
    if times.len() < 2 {
        return Err(ChainError::invalid("grid needs at least two points"));
    }
    let n = times.len() - 1;
    let dt = (times[n] - times[0]) / T::from_count(n);
    if !(dt > T::zero()) {
        return Err(ChainError::invalid("grid must be increasing"));
    }
    let tol = T::tolerance(1e-9, T::one()) * dt.max(times[n].abs());
    for (i, t) in times.iter().enumerate() {
        let expect = times[0] + dt * T::from_count(i);
        if (*t - expect).abs() > tol.max(T::lit(1e-6) * dt) {
            return Err(ChainError::invalid(format!("grid is not uniform at index {i}")));
        }
    }
    Ok(dt)
}

/// Which phase a `Γ` point was evaluated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Phase {
    Linear,
    Zigzag,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaPoint<T> {
    pub delta: T,
    pub gamma: T,
    pub phase: Phase,
}

/// `Γ` at detuning `Δ`, using the zigzag Hessian below the finite-ring critical point.
pub fn gamma_across_transition<T: Real>(n_ions: usize, eta_c: T, delta: T) -> Result<GammaPoint<T>> {
    let params = ChainParams::from_delta(n_ions, delta, eta_c, T::zero())?;
    let critical: T = critical_frequency_finite(n_ions);
    if params.nu_t > critical {
        let gamma = gamma_linear(&params)?;
        return Ok(GammaPoint { delta, gamma, phase: Phase::Linear });
    }
    let spectrum = zigzag_spectrum(params.nu_t, n_ions)?;
    let amps = zigzag_amplitudes(&params, &spectrum, 1)?;
    Ok(GammaPoint { delta, gamma: gamma_coefficient(&amps).direct, phase: Phase::Zigzag })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuspAnalysis<T> {
    pub points: Vec<GammaPoint<T>>,
    pub left: LinearFit<T>,
    pub right: LinearFit<T>,
    /// Detuning of the smallest sampled `Γ`.
    pub minimum_delta: T,
    /// `|s_R − s_L| / sqrt(σ_L² + σ_R²)`.
    pub slope_separation: T,
}

/// Scans `Γ(Δ)` across the transition and compares secant slopes on each side of `Δ = 0`.
pub fn gamma_cusp<T: Real>(n_ions: usize, eta_c: T, deltas: &[T]) -> Result<CuspAnalysis<T>> {
    let points = deltas.iter().map(|&d| gamma_across_transition(n_ions, eta_c, d)).collect::<Result<Vec<_>>>()?;
    let side = |pred: &dyn Fn(T) -> bool| -> Result<LinearFit<T>> {
        let (x, y): (Vec<T>, Vec<T>) = points.iter().filter(|p| pred(p.delta)).map(|p| (p.delta, p.gamma)).unzip();
        linear_fit(&x, &y)
    };
    let left = side(&|d| d <= T::zero())?;
    let right = side(&|d| d >= T::zero())?;
    let minimum_delta = points
        .iter()
        .fold(None::<&GammaPoint<T>>, |best, p| match best {
            Some(b) if b.gamma <= p.gamma => Some(b),
            _ => Some(p),
        })
        .map(|p| p.delta)
        .unwrap_or_else(T::zero);
    let spread = (left.slope_stderr * left.slope_stderr + right.slope_stderr * right.slope_stderr).sqrt();
    let slope_separation = (right.slope - left.slope).abs() / spread;
    Ok(CuspAnalysis { points, left, right, minimum_delta, slope_separation })
}

/// Summary of the short- and long-time scales at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport<T> {
    pub gamma: T,
    pub gamma_fit: T,
    pub a_infinity: T,
    pub t_star: T,
    pub v_max: T,
    pub k_star: T,
}

pub fn asymptotics_report<T: Real>(params: &ChainParams<T>) -> Result<AsymptoticsReport<T>> {
    let amps = linear_amplitudes(params)?;
    let gamma = gamma_coefficient(&amps).direct;
    let t_fit = T::lit(MAX_FIT_WINDOW) / params.nu_t;
    let fit = gamma_fit_from_amplitudes(&amps, t_fit, 200)?;
    let revival = revival_time(params.n_ions, params.nu_t)?;
    Ok(AsymptoticsReport {
        gamma,
        gamma_fit: fit.gamma_fit,
        a_infinity: a_infinity(&amps).direct,
        t_star: revival.t_star,
        v_max: revival.v_max,
        k_star: revival.k_star,
    })
}

/// `n` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if n < 2 || !(lo > T::zero()) || !(hi > lo) {
        return Err(ChainError::invalid("log grid needs 0 < lo < hi and at least 2 points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * T::from_count(i) / T::from_count(n - 1)).exp()).collect())
}

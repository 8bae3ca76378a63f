//! Recoil displacement amplitudes and Ramsey observables of the probe spin.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ChainError, Result};
use crate::linear_modes::{mode_matrix, ModeIndex, ModeMatrix, ModeSet};
use crate::model::ChainParams;
use crate::num::Real;
use crate::zigzag_modes::ZigzagSpectrum;

/// Entries of the probe row below this magnitude are treated as exact zeros
/// when deciding whether a zero-frequency mode is excited.
pub const ZERO_COUPLING: f64 = 1e-10;

/// Identifies a mode in either phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModeLabel {
    Linear(ModeIndex),
    /// Column of the zigzag mode matrix.
    Zigzag(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeAmplitude<T> {
    pub label: ModeLabel,
    /// Coherent displacement `α` after the kick (purely imaginary).
    pub alpha: Complex<T>,
    pub omega: T,
}

impl<T: Real> ModeAmplitude<T> {
    pub fn weight(&self) -> T {
        self.alpha.norm_sqr()
    }
}

/// Displacement amplitudes imprinted on every mode by a recoil kick at one ion.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementAmplitudes<T> {
    pub modes: Vec<ModeAmplitude<T>>,
    /// Kicked ion, 1-based.
    pub probe_site: usize,
    pub eta0: T,
    pub nu_t: T,
}

impl<T: Real> DisplacementAmplitudes<T> {
    /// Builds `α = i η₀ sqrt(ν_t/ω) R_probe` from a probe row and its frequencies.
    ///
    /// Zero-frequency modes that the probe row does not touch are dropped;
    /// an excited zero-frequency mode is a [`ChainError::SoftModeSingularity`].
    pub fn from_probe_row(
        labels: impl IntoIterator<Item = ModeLabel>,
        omegas: &[T],
        row: &[T],
        probe_site: usize,
        eta0: T,
        nu_t: T,
    ) -> Result<Self> {
        if omegas.len() != row.len() {
            return Err(ChainError::invalid("frequency list and probe row differ in length"));
        }
        let zero = T::tolerance(ZERO_COUPLING, T::one());
        let mut modes = Vec::with_capacity(omegas.len());
        for ((label, &omega), &r) in labels.into_iter().zip(omegas).zip(row) {
            if omega <= T::zero() {
                if r.abs() <= zero {
                    continue;
                }
                return Err(ChainError::SoftModeSingularity(format!(
                    "mode {label:?} has frequency {omega} and couples to the probe"
                )));
            }
            let eta = eta0 * (nu_t / omega).sqrt() * r;
            modes.push(ModeAmplitude { label, alpha: Complex::new(T::zero(), eta), omega });
        }
        Ok(Self { modes, probe_site, eta0, nu_t })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `Σ |α|² ω`; equals `η₀² ν_t` for an orthogonal mode matrix.
    pub fn sum_rule(&self) -> T {
        self.modes.iter().map(|m| m.weight() * m.omega).sum()
    }

    /// Multiplies every amplitude by `c` (the effect of scaling the Lamb-Dicke parameter).
    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.alpha *= c;
        }
        out.eta0 *= c;
        out
    }

    /// `A(t) = 2 Σ |α|² sin²(ω t / 2)`.
    pub fn exponent_a(&self, t: T) -> T {
        let two = T::lit(2.0);
        self.modes
            .iter()
            .map(|m| {
                let s = (m.omega * t / two).sin();
                two * m.weight() * s * s
            })
            .sum()
    }

    /// `A_T(t) = 2 Σ coth(ω / 2θ) |α|² sin²(ω t / 2)`; `θ = 0` reduces to [`Self::exponent_a`].
    pub fn exponent_a_thermal(&self, t: T, theta: T) -> Result<T> {
        check_theta(theta)?;
        Ok(self.thermal_unchecked(t, theta))
    }

    fn thermal_unchecked(&self, t: T, theta: T) -> T {
        if theta == T::zero() {
            return self.exponent_a(t);
        }
        let two = T::lit(2.0);
        self.modes
            .iter()
            .map(|m| {
                let s = (m.omega * t / two).sin();
                let occupation = (m.omega / (two * theta)).tanh().recip();
                two * occupation * m.weight() * s * s
            })
            .sum()
    }

    /// `V(t) = exp(−A_T(t))`.
    pub fn visibility(&self, t: T, theta: T) -> Result<T> {
        Ok((-self.exponent_a_thermal(t, theta)?).exp())
    }

    /// Coherent-state overlap `S(t)`; defined only at zero temperature.
    pub fn overlap(&self, t: T, theta: T) -> Result<Complex<T>> {
        check_theta(theta)?;
        if theta > T::zero() {
            return Err(ChainError::Unsupported(
                "the complex overlap is only defined for the zero-temperature state".into(),
            ));
        }
        let two = T::lit(2.0);
        let (mut phase, mut decay) = (T::zero(), T::zero());
        for m in &self.modes {
            let w = m.weight();
            let x = m.omega * t;
            let s = (x / two).sin();
            phase += w * x.sin();
            decay += two * w * s * s;
        }
        let r = (-decay).exp();
        Ok(Complex::new(r * phase.cos(), r * phase.sin()))
    }

    /// `P_g = ½ [1 + Re(e^{iφ} S(t))]` at zero temperature.
    pub fn ramsey_probability(&self, phi: T, t: T) -> Result<T> {
        let s = self.overlap(t, T::zero())?;
        let rotated = Complex::new(phi.cos(), phi.sin()) * s;
        let half = T::lit(0.5);
        Ok(half * (T::one() + rotated.re))
    }

    /// Displacement autocorrelation of the probe ion, `k_L² G(t) = 2 A(t)`.
    ///
    /// The value is `G` in units of `1/k_L²`, so the η-normalised amplitudes
    /// fix it without a separate laser wave number.
    pub fn autocorrelation_g(&self, t: T) -> T {
        T::lit(2.0) * self.exponent_a(t)
    }

    /// Evaluates `A`, `V` and optionally `S` on a time grid in parallel.
    pub fn trace(&self, times: Vec<T>, theta: T, with_overlap: bool) -> Result<VisibilityTrace<T>> {
        check_theta(theta)?;
        if with_overlap && theta > T::zero() {
            return Err(ChainError::Unsupported(
                "the complex overlap is only defined for the zero-temperature state".into(),
            ));
        }
        let rows: Vec<(T, Option<Complex<T>>)> = times
            .par_iter()
            .map(|&t| {
                let a = self.thermal_unchecked(t, theta);
                let s = if with_overlap { self.overlap(t, T::zero()).ok() } else { None };
                (a, s)
            })
            .collect();
        let exponent: Vec<T> = rows.iter().map(|r| r.0).collect();
        let visibility = exponent.iter().map(|a| (-*a).exp()).collect();
        let overlap = with_overlap.then(|| rows.iter().map(|r| r.1.unwrap_or_default()).collect());
        Ok(VisibilityTrace { times, exponent, visibility, overlap })
    }
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta >= T::zero() && theta.is_finite()) {
        return Err(ChainError::invalid(format!("theta must be non-negative, got {theta}")));
    }
    Ok(())
}

/// Amplitudes for an explicit transverse mode set and mode matrix.
pub fn displacement_amplitudes<T: Real>(
    params: &ChainParams<T>,
    modes: &ModeSet<T>,
    matrix: &ModeMatrix<T>,
    probe_site: usize,
) -> Result<DisplacementAmplitudes<T>> {
    let n = matrix.n_ions();
    if probe_site == 0 || probe_site > n {
        return Err(ChainError::invalid(format!("probe site {probe_site} outside 1..={n}")));
    }
    if modes.len() != matrix.modes.len() || modes.modes.iter().zip(&matrix.modes).any(|((a, _), b)| a != b) {
        return Err(ChainError::invalid("mode set and mode matrix use different orderings"));
    }
    let omegas: Vec<T> = modes.frequencies().collect();
    if let Some((idx, w)) = modes.modes.iter().find(|(_, w)| *w <= T::zero()) {
        return Err(ChainError::SoftModeSingularity(format!(
            "transverse mode {idx} has frequency {w}; the Lamb-Dicke parameter diverges"
        )));
    }
    let row: Vec<T> = (0..n).map(|c| matrix.entry(probe_site, c)).collect();
    DisplacementAmplitudes::from_probe_row(
        modes.modes.iter().map(|(m, _)| ModeLabel::Linear(*m)),
        &omegas,
        &row,
        probe_site,
        params.eta0(),
        params.nu_t,
    )
}

/// Linear-chain amplitudes for a kick at ion 1.
pub fn linear_amplitudes<T: Real>(params: &ChainParams<T>) -> Result<DisplacementAmplitudes<T>> {
    let modes = ModeSet::transverse(params.nu_t, params.n_ions)?;
    let matrix = mode_matrix(params.n_ions)?;
    displacement_amplitudes(params, &modes, &matrix, 1)
}

/// Zigzag-phase amplitudes from the transverse row of `R^zz` at `probe_site`.
pub fn zigzag_amplitudes<T: Real>(
    params: &ChainParams<T>,
    spectrum: &ZigzagSpectrum<T>,
    probe_site: usize,
) -> Result<DisplacementAmplitudes<T>> {
    let n = spectrum.n_ions();
    if probe_site == 0 || probe_site > n {
        return Err(ChainError::invalid(format!("probe site {probe_site} outside 1..={n}")));
    }
    let r = spectrum.transverse_row(probe_site);
    let row: Vec<T> = (0..2 * n).map(|c| spectrum.modes[(r, c)]).collect();
    DisplacementAmplitudes::from_probe_row(
        (0..2 * n).map(ModeLabel::Zigzag),
        &spectrum.frequencies,
        &row,
        probe_site,
        params.eta0(),
        spectrum.equilibrium.nu_t,
    )
}

/// `D = sqrt(1 − V²)`, the which-path information carried by the crystal.
pub fn distinguishability<T: Real>(v: T) -> Result<T> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(ChainError::invalid(format!("visibility must lie in [0, 1], got {v}")));
    }
    Ok((T::one() - v * v).max(T::zero()).sqrt())
}

/// Sampled visibility.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityTrace<T> {
    /// Times in units of 1/ω₀.
    pub times: Vec<T>,
    pub exponent: Vec<T>,
    pub visibility: Vec<T>,
    pub overlap: Option<Vec<Complex<T>>>,
}

impl<T: Real> VisibilityTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean_visibility(&self) -> T {
        self.visibility.iter().copied().sum::<T>() / T::from_count(self.len().max(1))
    }
}

/// `n` evenly spaced points on `[start, end]` including both ends.
pub fn linear_grid<T: Real>(start: T, end: T, n: usize) -> Result<Vec<T>> {
    if n < 2 || !(end > start) {
        return Err(ChainError::invalid(format!(
            "time grid needs at least 2 points and t_max > t_min (got {n} on [{start}, {end}])"
        )));
    }
    let step = (end - start) / T::from_count(n - 1);
    Ok((0..n).map(|i| start + step * T::from_count(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_modes::{critical_frequency_finite, Parity};
    use crate::zigzag_modes::zigzag_spectrum;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(n: usize, nu_t: f64, eta_c: f64) -> ChainParams<f64> {
        ChainParams::new(n, nu_t, eta_c, 0.0).unwrap()
    }

    fn single(alpha: f64, omega: f64) -> DisplacementAmplitudes<f64> {
        DisplacementAmplitudes::from_probe_row([ModeLabel::Zigzag(0)], &[omega], &[1.0], 1, alpha, omega).unwrap()
    }

    #[test]
    fn amplitudes_are_imaginary_and_obey_sum_rule() {
        for n in [4, 100, 1000] {
            let p = params(n, 2.3, 0.1);
            let amps = linear_amplitudes(&p).unwrap();
            assert!(amps.modes.iter().all(|m| m.alpha.re == 0.0));
            let eta0 = p.eta0();
            assert_relative_eq!(amps.sum_rule(), eta0 * eta0 * p.nu_t, max_relative = 1e-10);
        }
    }

    #[test]
    fn bulk_mode_amplitude() {
        let p = params(50, 2.2, 0.3);
        let amps = linear_amplitudes(&p).unwrap();
        let bulk =
            amps.modes.iter().find(|m| m.label == ModeLabel::Linear(ModeIndex { n: 0, parity: Parity::Even })).unwrap();
        assert_relative_eq!(bulk.alpha.im, p.eta0() / 50f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn four_ion_odd_mode_amplitude() {
        let p = params(4, 2.5, 0.2);
        let amps = linear_amplitudes(&p).unwrap();
        let m =
            amps.modes.iter().find(|m| m.label == ModeLabel::Linear(ModeIndex { n: 1, parity: Parity::Odd })).unwrap();
        let expect = p.eta0() * (2.5f64 / 3.75f64.sqrt()).sqrt() * 0.5f64.sqrt();
        assert_relative_eq!(m.alpha.im.abs(), expect, max_relative = 1e-12);
    }

    #[test]
    fn soft_mode_is_singular() {
        let nc: f64 = critical_frequency_finite(20);
        let p = params(20, nc, 0.1);
        assert!(matches!(linear_amplitudes(&p), Err(ChainError::SoftModeSingularity(_))));
    }

    #[test]
    fn four_ion_brute_force_oracle() {
        // direct 4-mode sum from the raw dispersion and explicit mode matrix entries
        let (nu, eta_c) = (2.4f64, 0.3);
        let p = params(4, nu, eta_c);
        let eta0 = eta_c * (3.5 * crate::model::zeta3()).sqrt().sqrt() / nu.sqrt();
        let w = |k: f64| {
            let s: f64 = (1..=2).map(|j| (j as f64).powi(-3) * (j as f64 * k / 2.0).sin().powi(2)).sum();
            (nu * nu - 4.0 * s).sqrt()
        };
        // R_{1,kσ} for N = 4: k = 0, π/2 (cos, sin), π
        let modes = [
            (w(0.0), 0.5),
            (w(std::f64::consts::FRAC_PI_2), (0.5f64).sqrt() * (std::f64::consts::FRAC_PI_2).cos()),
            (w(std::f64::consts::FRAC_PI_2), (0.5f64).sqrt() * (std::f64::consts::FRAC_PI_2).sin()),
            (w(std::f64::consts::PI), -0.5),
        ];
        let amps = linear_amplitudes(&p).unwrap();
        for i in 0..200 {
            let t = 0.37 * i as f64;
            let oracle: f64 =
                modes.iter().map(|(om, r)| 2.0 * eta0 * eta0 * nu / om * r * r * (om * t / 2.0).sin().powi(2)).sum();
            assert!((amps.exponent_a(t) - oracle).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn single_mode_reduces_to_single_ion_signal() {
        let amps = single(0.3, 1.0);
        assert_eq!(amps.exponent_a(0.0), 0.0);
        assert_relative_eq!(amps.exponent_a(std::f64::consts::PI), 2.0 * 0.09, max_relative = 1e-14);
        let t = 0.8;
        let s = amps.overlap(t, 0.0).unwrap();
        let a2 = 0.09f64;
        let expect = Complex::new(0.0, a2 * t.sin()).exp() * (-2.0 * a2 * (t / 2.0).sin().powi(2)).exp();
        assert!((s - expect).norm() < 1e-15);
    }

    #[test]
    fn thermal_reduction_and_coth_factor() {
        let amps = single(0.2, 1.0);
        for t in [0.0, 0.3, 1.7, 9.0] {
            assert_eq!(amps.exponent_a_thermal(t, 0.0).unwrap(), amps.exponent_a(t));
        }
        let t = std::f64::consts::PI;
        let ratio = amps.exponent_a_thermal(t, 0.5).unwrap() / amps.exponent_a(t);
        assert_relative_eq!(ratio, 1.0 / 1f64.tanh(), max_relative = 1e-14);
        assert!((ratio - 1.3130).abs() < 1e-4);
        assert!(amps.exponent_a_thermal(t, -1.0).is_err());
    }

    #[test]
    fn thermal_exponent_grows_with_temperature() {
        let amps = linear_amplitudes(&params(16, 2.3, 0.2)).unwrap();
        for t in [0.4, 2.0, 11.0] {
            let mut prev = amps.exponent_a(t);
            for theta in [0.1, 0.5, 1.0, 3.0, 10.0] {
                let a = amps.exponent_a_thermal(t, theta).unwrap();
                assert!(a > prev);
                prev = a;
            }
        }
    }

    #[test]
    fn overlap_modulus_and_thermal_rejection() {
        let amps = linear_amplitudes(&params(100, 2.15, 0.25)).unwrap();
        let times = linear_grid(0.0, 300.0, 1000).unwrap();
        let tr = amps.trace(times, 0.0, true).unwrap();
        for (v, s) in tr.visibility.iter().zip(tr.overlap.as_ref().unwrap()) {
            assert!((s.norm() - v).abs() < 1e-12);
            assert!(*v > 0.0 && *v <= 1.0);
        }
        assert_eq!(tr.exponent[0], 0.0);
        assert!(matches!(amps.overlap(1.0, 0.3), Err(ChainError::Unsupported(_))));
    }

    #[test]
    fn fringe_contrast_equals_overlap_modulus() {
        let amps = linear_amplitudes(&params(12, 2.2, 0.4)).unwrap();
        let t = 3.3;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..4096 {
            let phi = std::f64::consts::TAU * i as f64 / 4096.0;
            let p = amps.ramsey_probability(phi, t).unwrap();
            assert!((0.0..=1.0).contains(&p));
            lo = lo.min(p);
            hi = hi.max(p);
        }
        assert!((hi - lo - amps.overlap(t, 0.0).unwrap().norm()).abs() < 1e-6);
        assert_relative_eq!(amps.ramsey_probability(0.0, 0.0).unwrap(), 1.0);
        assert!(amps.ramsey_probability(std::f64::consts::PI, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn distinguishability_values() {
        assert_eq!(distinguishability(1.0).unwrap(), 0.0);
        assert_eq!(distinguishability(0.0).unwrap(), 1.0);
        assert_relative_eq!(distinguishability(0.6).unwrap(), 0.8, max_relative = 1e-15);
        assert!(distinguishability(1.2).is_err());
    }

    #[test]
    fn zigzag_amplitudes_obey_sum_rule() {
        let nc: f64 = critical_frequency_finite(16);
        let p = params(16, nc * 0.9, 0.1);
        let spec = zigzag_spectrum(p.nu_t, 16).unwrap();
        let amps = zigzag_amplitudes(&p, &spec, 1).unwrap();
        // Σ|α|²ω = η₀² ν_t Σ R² over the transverse row
        assert_relative_eq!(amps.sum_rule(), p.eta0().powi(2) * p.nu_t, max_relative = 1e-9);
    }

    #[test]
    fn grid_validation() {
        assert!(linear_grid(0.0, 1.0, 1).is_err());
        assert!(linear_grid(1.0, 1.0, 5).is_err());
        assert_eq!(linear_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn f32_exponent() {
        let p = ChainParams::<f32>::new(20, 2.3, 0.1, 0.0).unwrap();
        let amps = linear_amplitudes(&p).unwrap();
        let expect = p.eta0() * p.eta0() * p.nu_t;
        assert!((amps.sum_rule() - expect).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn exponent_even_bounded_and_quadratic_in_eta(t in -200.0f64..200.0, c in 0.1f64..3.0) {
            let amps = linear_amplitudes(&params(10, 2.3, 0.2)).unwrap();
            let a = amps.exponent_a(t);
            let a_inf: f64 = amps.modes.iter().map(|m| m.weight()).sum();
            prop_assert!(a >= 0.0 && a <= 2.0 * a_inf + 1e-15);
            prop_assert!((a - amps.exponent_a(-t)).abs() < 1e-13);
            let s = amps.overlap(t, 0.0).unwrap();
            prop_assert!((amps.overlap(-t, 0.0).unwrap() - s.conj()).norm() < 1e-13);
            let scaled = amps.scaled(c).exponent_a(t);
            prop_assert!((scaled - c * c * a).abs() <= 1e-12 * (1.0 + scaled.abs()));
            prop_assert!((amps.autocorrelation_g(t) - amps.autocorrelation_g(-t)).abs() < 1e-12);
        }
    }
}

//! Sampled visibility on a symmetric window and its discrete Fourier spectrum.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::asymptotics::uniform_step;
use crate::error::{ChainError, Result};
use crate::num::Real;
use crate::ramsey::{DisplacementAmplitudes, VisibilityTrace};

pub const DEFAULT_WINDOW: f64 = 1e4;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const MIN_SAMPLES: usize = 1 << 10;
/// Default cap on `samples × modes` for one trace.
pub const DEFAULT_BUDGET: usize = 2_000_000_000;
/// Bins at and below this index are excluded from band fractions.
pub const DC_FLOOR_BINS: usize = 3;

/// Samples `V(t)` at `t_i = −T_F/2 + i T_F/n_s`, `i = 0..n_s`.
pub fn visibility_trace<T: Real>(
    amps: &DisplacementAmplitudes<T>,
    window: T,
    samples: usize,
    theta: T,
    budget: usize,
) -> Result<VisibilityTrace<T>> {
    if samples < MIN_SAMPLES {
        return Err(ChainError::invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if !(window > T::zero() && window.is_finite()) {
        return Err(ChainError::invalid(format!("window must be positive, got {window}")));
    }
    let cost = samples.saturating_mul(amps.len().max(1));
    if cost > budget {
        return Err(ChainError::ResourceLimit(format!(
            "{samples} samples × {} modes exceeds the budget of {budget}",
            amps.len()
        )));
    }
    let dt = window / T::from_count(samples);
    let start = -window / T::lit(2.0);
    let times = (0..samples).map(|i| start + dt * T::from_count(i)).collect();
    amps.trace(times, theta, false)
}

/// Unnormalised DFT `X_m = Σ_j x_j e^{−2πi jm/n}` for any length.
pub fn dft<T: Real>(values: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = values.iter().map(|v| Complex::new(*v, T::zero())).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// `|DFT|` of a sampled visibility, on `ω ≥ 0`, normalised to `F(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierSpectrum<T> {
    /// Angular frequencies `2π m / T_F` (units ω₀).
    pub omega: Vec<T>,
    pub amplitude: Vec<T>,
    pub bin_width: T,
    /// `|X_0|` before normalisation.
    pub dc: T,
}

pub fn fourier_spectrum<T: Real>(trace: &VisibilityTrace<T>) -> Result<FourierSpectrum<T>> {
    let dt = uniform_step(&trace.times)?;
    let n = trace.len();
    let x = dft(&trace.visibility);
    let dc = x[0].norm_sqr().sqrt();
    if !(dc > T::zero()) {
        return Err(ChainError::NumericalFailure("zero DC component; cannot normalise".into()));
    }
    let bin_width = T::TAU() / (dt * T::from_count(n));
    let bins = n / 2 + 1;
    let omega = (0..bins).map(|m| bin_width * T::from_count(m)).collect();
    let amplitude = x[..bins].iter().map(|c| c.norm_sqr().sqrt() / dc).collect();
    Ok(FourierSpectrum { omega, amplitude, bin_width, dc })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandFraction<T> {
    /// Share of `Σ F²` above the DC floor that falls inside the band.
    pub fraction: T,
    pub omega_min: T,
    pub omega_max: T,
}

/// Fraction of the spectral power `F²` above the DC floor lying inside `[omega_min, omega_max]`.
pub fn spectral_band_check<T: Real>(
    spectrum: &FourierSpectrum<T>,
    omega_min: T,
    omega_max: T,
) -> Result<BandFraction<T>> {
    if !(omega_min < omega_max) {
        return Err(ChainError::invalid(format!("band needs ω_min < ω_max, got [{omega_min}, {omega_max}]")));
    }
    let floor = spectrum.bin_width * T::from_count(DC_FLOOR_BINS);
    let (mut inside, mut total) = (T::zero(), T::zero());
    for (w, f) in spectrum.omega.iter().zip(&spectrum.amplitude) {
        if *w <= floor {
            continue;
        }
        let p = *f * *f;
        total += p;
        if *w >= omega_min && *w <= omega_max {
            inside += p;
        }
    }
    let fraction = if total > T::zero() { inside / total } else { T::zero() };
    Ok(BandFraction { fraction, omega_min, omega_max })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak<T> {
    pub bin: usize,
    pub omega: T,
    pub amplitude: T,
    pub prominence: T,
}

/// Local maxima whose topographic prominence exceeds `prominence`, largest first.
pub fn find_peaks<T: Real>(spectrum: &FourierSpectrum<T>, prominence: T) -> Result<Vec<Peak<T>>> {
    if !(prominence > T::zero()) {
        return Err(ChainError::invalid("prominence must be positive"));
    }
    let f = &spectrum.amplitude;
    let n = f.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if f[i] > f[i - 1] {
            // handle flat tops by taking the plateau's left edge
            let mut j = i;
            while j + 1 < n && f[j + 1] == f[i] {
                j += 1;
            }
            if j + 1 < n && f[j + 1] < f[i] {
                let height = f[i];
                let mut left_min = height;
                for k in (0..i).rev() {
                    if f[k] > height {
                        break;
                    }
                    left_min = left_min.min(f[k]);
                }
                let mut right_min = height;
                for &v in &f[j + 1..] {
                    if v > height {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                let prom = height - left_min.max(right_min);
                if prom > prominence {
                    peaks.push(Peak { bin: i, omega: spectrum.omega[i], amplitude: height, prominence: prom });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks.sort_by(|a, b| b.amplitude.partial_cmp(&a.amplitude).unwrap_or(std::cmp::Ordering::Equal));
    Ok(peaks)
}

/// Largest amplitude above the DC floor.
pub fn max_non_dc<T: Real>(spectrum: &FourierSpectrum<T>) -> T {
    spectrum.amplitude.iter().skip(DC_FLOOR_BINS + 1).fold(T::zero(), |a, b| a.max(*b))
}

/// Distance in bins from `omega` to the nearest entry of `targets`.
pub fn bins_to_nearest<T: Real>(omega: T, targets: &[T], bin_width: T) -> T {
    targets.iter().map(|w| (*w - omega).abs() / bin_width).fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_modes::ModeSet;
    use crate::model::ChainParams;
    use crate::ramsey::{linear_amplitudes, ModeLabel};

    fn naive_dft(x: &[f64]) -> Vec<Complex<f64>> {
        let n = x.len();
        (0..n)
            .map(|m| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let a = -std::f64::consts::TAU * ((j * m) % n) as f64 / n as f64;
                        Complex::new(v * a.cos(), v * a.sin())
                    })
                    .sum()
            })
            .collect()
    }

    fn trace_of(values: Vec<f64>, dt: f64) -> VisibilityTrace<f64> {
        let times = (0..values.len()).map(|i| i as f64 * dt).collect();
        VisibilityTrace { times, exponent: values.iter().map(|v| -v.ln()).collect(), visibility: values, overlap: None }
    }

    #[test]
    fn fft_matches_naive_dft_for_non_power_of_two() {
        let x: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
        let fast = dft(&x);
        let slow = naive_dft(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn parseval() {
        let x: Vec<f64> = (0..3000).map(|i| (0.37 * i as f64).sin().powi(2) + 0.1).collect();
        let freq: f64 = dft(&x).iter().map(|c| c.norm_sqr()).sum();
        let time: f64 = x.iter().map(|v| v * v).sum::<f64>() * x.len() as f64;
        assert!(((freq - time) / time).abs() < 1e-8);
    }

    #[test]
    fn constant_signal_has_only_dc() {
        let s = fourier_spectrum(&trace_of(vec![1.0; 2048], 0.1)).unwrap();
        assert_eq!(s.amplitude[0], 1.0);
        assert!(s.amplitude[1..].iter().all(|a| *a < 1e-12));
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let mut tr = trace_of(vec![1.0; 2048], 0.1);
        tr.times[5] += 0.03;
        assert!(fourier_spectrum(&tr).is_err());
    }

    #[test]
    fn single_mode_peak_at_mode_frequency() {
        let omega = 1.3;
        let amps =
            DisplacementAmplitudes::from_probe_row([ModeLabel::Zigzag(0)], &[omega], &[1.0], 1, 0.1, omega).unwrap();
        let tr = visibility_trace(&amps, 2000.0, 1 << 14, 0.0, DEFAULT_BUDGET).unwrap();
        let s = fourier_spectrum(&tr).unwrap();
        let peaks = find_peaks(&s, 0.1 * max_non_dc(&s)).unwrap();
        assert!(bins_to_nearest(peaks[0].omega, &[omega], s.bin_width) <= 1.0);
    }

    #[test]
    fn tones_in_band_and_two_peaks() {
        let dt = 0.05;
        let n = 8192;
        let (w1, w2) = (2.0, 3.1);
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                1.0 + 0.1 * (w1 * t).cos() + 0.05 * (w2 * t).cos()
            })
            .collect();
        let s = fourier_spectrum(&trace_of(values, dt)).unwrap();
        let peaks = find_peaks(&s, 0.01).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!(bins_to_nearest(peaks[0].omega, &[w1], s.bin_width) <= 1.0);
        assert!(bins_to_nearest(peaks[1].omega, &[w2], s.bin_width) <= 1.0);
        let single: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (w1 * i as f64 * dt).cos()).collect();
        let s1 = fourier_spectrum(&trace_of(single, dt)).unwrap();
        let frac = spectral_band_check(&s1, 1.0, 2.5).unwrap().fraction;
        assert!(frac > 0.99);
        assert!(find_peaks(&s, 2.0).unwrap().is_empty());
        assert!(spectral_band_check(&s1, 2.5, 1.0).is_err());
    }

    #[test]
    fn trace_is_even_and_budgeted() {
        let p = ChainParams::<f64>::from_delta(20, 0.1, 0.25, 0.0).unwrap();
        let amps = linear_amplitudes(&p).unwrap();
        let n = 2048;
        let tr = visibility_trace(&amps, 500.0, n, 0.0, DEFAULT_BUDGET).unwrap();
        for i in 1..n / 2 {
            assert!((tr.times[i] + tr.times[n - i]).abs() < 1e-9);
            assert!((tr.visibility[i] - tr.visibility[n - i]).abs() < 1e-12);
        }
        assert!(matches!(visibility_trace(&amps, 500.0, n, 0.0, 1000), Err(ChainError::ResourceLimit(_))));
        assert!(visibility_trace(&amps, 500.0, 100, 0.0, DEFAULT_BUDGET).is_err());
    }

    fn small_eta_peaks(window: f64, samples: usize) -> (Vec<f64>, f64, Vec<f64>) {
        let p = ChainParams::from_delta(16, 0.3, 0.02, 0.0).unwrap();
        let amps = linear_amplitudes(&p).unwrap();
        let tr = visibility_trace(&amps, window, samples, 0.0, DEFAULT_BUDGET).unwrap();
        let s = fourier_spectrum(&tr).unwrap();
        let peaks = find_peaks(&s, 0.1 * max_non_dc(&s)).unwrap();
        let modes: Vec<f64> = ModeSet::transverse(p.nu_t, 16).unwrap().frequencies().collect();
        (peaks.iter().map(|p| p.omega).collect(), s.bin_width, modes)
    }

    #[test]
    fn small_eta_peaks_are_mode_frequencies_and_converge() {
        let (peaks, bin, modes) = small_eta_peaks(2000.0, 1 << 14);
        let mut distinct = modes.clone();
        distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(peaks.len(), distinct.len());
        for w in &peaks {
            assert!(bins_to_nearest(*w, &modes, bin) <= 1.0);
        }
        // halving dt
        let (fine, _, _) = small_eta_peaks(2000.0, 1 << 15);
        // doubling T_F
        let (long, long_bin, _) = small_eta_peaks(4000.0, 1 << 15);
        for w in &peaks {
            assert!(bins_to_nearest(*w, &fine, bin) < 1.0);
            assert!(bins_to_nearest(*w, &long, long_bin) < 2.0);
            assert!(bins_to_nearest(*w, &long, bin) < 1.0);
        }
    }
}

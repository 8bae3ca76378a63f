//! Unit conventions and parameter derivation.
//!
//! Everything downstream of this module is dimensionless: frequencies in
//! units of `ω₀ = sqrt(Q²/(m a³))` (Gaussian charge), times in `1/ω₀`,
//! lengths in the lattice spacing `a`, wave numbers in `1/a`. Physical SI
//! inputs only appear in [`PhysicalInput`].

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{ChainError, Result};
use crate::num::Real;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

const ZETA3_TERMS: u64 = 1_000_000;

/// Apéry's constant ζ(3), summed once and cached.
///
/// Direct summation of `j⁻³` up to 10⁶ (smallest terms first), plus the
/// Euler–Maclaurin tail `1/(2M²) + 1/(2M³) + 1/(4M⁴) − 1/(12M⁶)` starting at
/// `M = 10⁶ + 1`. The neglected remainder is `O(M⁻⁸)`.
pub fn zeta3() -> f64 {
    static ZETA3: OnceLock<f64> = OnceLock::new();
    *ZETA3.get_or_init(|| {
        let head: f64 = (1..=ZETA3_TERMS).rev().map(|j| (j as f64).powi(-3)).sum();
        let m = (ZETA3_TERMS + 1) as f64;
        let tail = 0.5 / (m * m) + 0.5 / m.powi(3) + 0.25 / m.powi(4) - 1.0 / (12.0 * m.powi(6));
        head + tail
    })
}

/// Critical transverse frequency of the infinite ring, `sqrt(7 ζ(3) / 2)` in units of ω₀.
pub fn critical_frequency_infinite<T: Real>() -> T {
    T::lit((3.5 * zeta3()).sqrt())
}

/// Physical trap and laser configuration (SI units).
///
/// The charge is given in coulomb and converted to Gaussian units with an
/// explicit `1/(4π ε₀)`, so `ω₀² = q² / (4π ε₀ m a³)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInput {
    pub ion_mass_kg: f64,
    pub ion_charge_c: f64,
    pub spacing_m: f64,
    pub laser_wavenumber_per_m: f64,
    /// Transverse trap frequency in rad/s.
    pub transverse_frequency: f64,
    #[serde(default)]
    pub temperature_k: f64,
}

/// Result of [`derive_parameters`]: the dimensionless chain plus the scales
/// needed to translate back.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedScales<T> {
    pub params: ChainParams<T>,
    /// ω₀ in rad/s.
    pub omega0: f64,
    /// Lamb-Dicke parameter of a free ion at the trap frequency.
    pub eta0: f64,
}

/// Characteristic frequency `sqrt(Q²/(m a³))` in rad/s for an SI charge.
pub fn omega0_si(mass_kg: f64, charge_c: f64, spacing_m: f64) -> f64 {
    let q2 = charge_c * charge_c / (4.0 * std::f64::consts::PI * EPSILON_0);
    (q2 / (mass_kg * spacing_m.powi(3))).sqrt()
}

/// `k_L sqrt(ħ / (2 m ν))` for an SI mass and angular frequency.
pub fn lamb_dicke_si(wavenumber: f64, mass_kg: f64, frequency: f64) -> f64 {
    wavenumber * (HBAR / (2.0 * mass_kg * frequency)).sqrt()
}

/// Converts a physical configuration to dimensionless chain parameters.
pub fn derive_parameters<T: Real>(input: &PhysicalInput, n_ions: usize) -> Result<DerivedScales<T>> {
    let positive = [
        ("ion_mass_kg", input.ion_mass_kg),
        ("ion_charge_c", input.ion_charge_c),
        ("spacing_m", input.spacing_m),
        ("laser_wavenumber_per_m", input.laser_wavenumber_per_m),
        ("transverse_frequency", input.transverse_frequency),
    ];
    for (name, value) in positive {
        if !(value.is_finite() && value > 0.0) {
            return Err(ChainError::invalid(format!("{name} must be positive, got {value}")));
        }
    }
    if !(input.temperature_k.is_finite() && input.temperature_k >= 0.0) {
        return Err(ChainError::invalid(format!("temperature_k must be non-negative, got {}", input.temperature_k)));
    }

    let omega0 = omega0_si(input.ion_mass_kg, input.ion_charge_c, input.spacing_m);
    let nu_t = input.transverse_frequency / omega0;
    let eta0 = lamb_dicke_si(input.laser_wavenumber_per_m, input.ion_mass_kg, input.transverse_frequency);
    let nu_c: f64 = critical_frequency_infinite();
    let eta_c = eta0 * (nu_t / nu_c).sqrt();
    let theta = K_B * input.temperature_k / (HBAR * omega0);

    let params = ChainParams::new(n_ions, T::lit(nu_t), T::lit(eta_c), T::lit(theta))?;
    Ok(DerivedScales { params, omega0, eta0 })
}

/// Dimensionless chain configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams<T> {
    /// Number of ions on the ring (even, at least 4).
    pub n_ions: usize,
    /// Transverse trap frequency in units of ω₀.
    pub nu_t: T,
    /// Lamb-Dicke parameter referenced to the infinite-chain critical frequency.
    pub eta_c: T,
    /// Temperature in units of ħω₀/k_B.
    pub theta: T,
}

pub(crate) fn check_ion_count(n_ions: usize) -> Result<()> {
    if n_ions < 4 || !n_ions.is_multiple_of(2) {
        return Err(ChainError::invalid(format!("ion count must be even and at least 4, got N = {n_ions}")));
    }
    Ok(())
}

impl<T: Real> ChainParams<T> {
    pub fn new(n_ions: usize, nu_t: T, eta_c: T, theta: T) -> Result<Self> {
        check_ion_count(n_ions)?;
        if !(nu_t.is_finite() && nu_t > T::zero()) {
            return Err(ChainError::invalid(format!("nu_t must be positive, got {nu_t}")));
        }
        if !(eta_c.is_finite() && eta_c >= T::zero()) {
            return Err(ChainError::invalid(format!("eta_c must be non-negative, got {eta_c}")));
        }
        if !(theta.is_finite() && theta >= T::zero()) {
            return Err(ChainError::invalid(format!("theta must be non-negative, got {theta}")));
        }
        Ok(Self { n_ions, nu_t, eta_c, theta })
    }

    /// Builds parameters from the distance `Δ = ν_t − ν_t^(c)` to the infinite-chain critical point.
    pub fn from_delta(n_ions: usize, delta: T, eta_c: T, theta: T) -> Result<Self> {
        Self::new(n_ions, critical_frequency_infinite::<T>() + delta, eta_c, theta)
    }

    pub fn delta(&self) -> T {
        self.nu_t - critical_frequency_infinite::<T>()
    }

    /// `η₀ = η^(c) sqrt(ν_t^(c) / ν_t)`.
    pub fn eta0(&self) -> T {
        self.eta_c * (critical_frequency_infinite::<T>() / self.nu_t).sqrt()
    }

    pub fn with_nu_t(&self, nu_t: T) -> Result<Self> {
        Self::new(self.n_ions, nu_t, self.eta_c, self.theta)
    }

    pub fn gap(&self) -> GapParams<T> {
        gap_parameters(self)
    }
}

/// Gap quantities near the linear–zigzag transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapParams<T> {
    pub nu_t: T,
    /// `Δ = ν_t − ν_t^(c)`; may be negative.
    pub delta_cap: T,
    /// Slope of the soft branch near `k = π/a`, `sqrt(ln 2)` in units of ω₀ a.
    pub h: T,
}

impl<T: Real> GapParams<T> {
    /// `δ = sqrt(ν_t² − ν_t^(c)²) = sqrt(Δ (2 ν_t^(c) + Δ))`, defined for `Δ ≥ 0`.
    pub fn delta(&self) -> Result<T> {
        if self.delta_cap < T::zero() {
            return Err(ChainError::UnstableLinearPhase(format!(
                "gap δ requested below the critical point (Δ = {})",
                self.delta_cap
            )));
        }
        let two = T::lit(2.0);
        Ok((self.delta_cap * (two * critical_frequency_infinite::<T>() + self.delta_cap)).sqrt())
    }

    /// Lower band edge in the form `sqrt(2 Δ ν_t + Δ²)` used for the Fourier band overlay.
    pub fn band_floor_overlay(&self) -> Result<T> {
        if self.delta_cap < T::zero() {
            return Err(ChainError::UnstableLinearPhase(format!(
                "band floor requested below the critical point (Δ = {})",
                self.delta_cap
            )));
        }
        Ok((T::lit(2.0) * self.delta_cap * self.nu_t + self.delta_cap * self.delta_cap).sqrt())
    }
}

pub fn gap_parameters<T: Real>(params: &ChainParams<T>) -> GapParams<T> {
    GapParams { nu_t: params.nu_t, delta_cap: params.delta(), h: T::LN_2().sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn magnesium(spacing_m: f64, k_l: f64, nu_t_over_omega0: f64) -> PhysicalInput {
        let m = 24.0 * ATOMIC_MASS_UNIT;
        let omega0 = omega0_si(m, ELEMENTARY_CHARGE, spacing_m);
        PhysicalInput {
            ion_mass_kg: m,
            ion_charge_c: ELEMENTARY_CHARGE,
            spacing_m,
            laser_wavenumber_per_m: k_l,
            transverse_frequency: nu_t_over_omega0 * omega0,
            temperature_k: 0.0,
        }
    }

    #[test]
    fn magnesium_characteristic_frequency() {
        let input = magnesium(33e-6, 1.0e7, 2.06);
        let d = derive_parameters::<f64>(&input, 100).unwrap();
        let khz = d.omega0 / (2.0 * std::f64::consts::PI) / 1e3;
        assert!((khz - 64.0).abs() / 64.0 < 0.01, "omega0 = 2π × {khz} kHz");
        assert_relative_eq!(d.params.nu_t, 2.06, max_relative = 1e-12);
    }

    #[test]
    fn magnesium_back_derived_wavelength() {
        // η₀ ≈ 0.62 at ν_t = ν_t^(c) fixes k_L; the implied wavelength is ~406 nm.
        let m = 24.0 * ATOMIC_MASS_UNIT;
        let omega0 = omega0_si(m, ELEMENTARY_CHARGE, 33e-6);
        let nu = critical_frequency_infinite::<f64>() * omega0;
        let k_l = 0.62 / lamb_dicke_si(1.0, m, nu);
        let lambda_nm = 2.0 * std::f64::consts::PI / k_l * 1e9;
        assert!((lambda_nm - 406.0).abs() < 3.0, "lambda = {lambda_nm} nm");

        let input = magnesium(33e-6, k_l, critical_frequency_infinite());
        let d = derive_parameters::<f64>(&input, 100).unwrap();
        assert_relative_eq!(d.eta0, 0.62, max_relative = 1e-10);
        assert_relative_eq!(d.params.eta_c, 0.62, max_relative = 1e-10);
    }

    #[test]
    fn omega0_power_law_in_spacing() {
        let a = magnesium(33e-6, 1e7, 2.2);
        let b = PhysicalInput { spacing_m: 8.0 * 33e-6, ..a.clone() };
        let ratio = omega0_si(b.ion_mass_kg, b.ion_charge_c, b.spacing_m)
            / omega0_si(a.ion_mass_kg, a.ion_charge_c, a.spacing_m);
        assert_relative_eq!(ratio, 8f64.powf(-1.5), max_relative = 1e-12);
        assert!((ratio - 0.0442).abs() < 1e-4);
    }

    #[test]
    fn lamb_dicke_linear_in_wavenumber() {
        let a = magnesium(33e-6, 1e7, 2.2);
        let b = PhysicalInput { laser_wavenumber_per_m: 2e7, ..a.clone() };
        let da = derive_parameters::<f64>(&a, 10).unwrap();
        let db = derive_parameters::<f64>(&b, 10).unwrap();
        assert_relative_eq!(db.eta0, 2.0 * da.eta0, max_relative = 1e-12);
        assert_relative_eq!(db.params.eta_c, 2.0 * da.params.eta_c, max_relative = 1e-12);
    }

    #[test]
    fn omega0_invariant_under_joint_mass_charge_scaling() {
        for c in [0.3, 2.0, 17.0] {
            let w = omega0_si(4e-26, 1.6e-19, 3e-5);
            let ws = omega0_si(c * 4e-26, c.sqrt() * 1.6e-19, 3e-5);
            assert_relative_eq!(w, ws, max_relative = 1e-13);
        }
    }

    #[test]
    fn temperature_in_natural_units() {
        let mut input = magnesium(33e-6, 1e7, 2.2);
        input.temperature_k = 1e-3;
        let d = derive_parameters::<f64>(&input, 10).unwrap();
        assert_relative_eq!(d.params.theta, K_B * 1e-3 / (HBAR * d.omega0), max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let good = magnesium(33e-6, 1e7, 2.2);
        for bad in [
            PhysicalInput { ion_mass_kg: 0.0, ..good.clone() },
            PhysicalInput { spacing_m: -1.0, ..good.clone() },
            PhysicalInput { laser_wavenumber_per_m: 0.0, ..good.clone() },
            PhysicalInput { temperature_k: -1.0, ..good.clone() },
        ] {
            assert!(matches!(derive_parameters::<f64>(&bad, 10), Err(ChainError::InvalidParameter(_))));
        }
        assert!(derive_parameters::<f64>(&good, 7).is_err());
    }

    #[test]
    fn eta_round_trip() {
        for nu in [0.5, 2.0, 2.051, 3.7] {
            let p = ChainParams::new(10, nu, 0.25, 0.0).unwrap();
            let nu_c: f64 = critical_frequency_infinite();
            assert_relative_eq!(p.eta_c * (nu_c / nu).sqrt(), p.eta0(), max_relative = 1e-14);
        }
    }

    #[test]
    fn gap_values() {
        let p = ChainParams::<f64>::from_delta(10, 1e-3, 0.1, 0.0).unwrap();
        let g = p.gap();
        let d = g.delta().unwrap();
        assert!((d - 0.06406).abs() < 1e-5, "δ = {d}");
        let nu_c: f64 = critical_frequency_infinite();
        assert!((d * d - (p.nu_t * p.nu_t - nu_c * nu_c)).abs() < 1e-15);
        assert!((g.h - 0.832_555).abs() < 1e-6);

        let zero = ChainParams::<f64>::from_delta(10, 0.0, 0.1, 0.0).unwrap().gap();
        assert_eq!(zero.delta().unwrap(), 0.0);

        let below = ChainParams::<f64>::from_delta(10, -1e-3, 0.1, 0.0).unwrap().gap();
        assert!(matches!(below.delta(), Err(ChainError::UnstableLinearPhase(_))));
    }

    #[test]
    fn critical_frequency_value() {
        let nu_c: f64 = critical_frequency_infinite();
        assert!((nu_c - 2.051_145_8).abs() < 1e-7);
        assert!((nu_c * nu_c - 3.5 * zeta3()).abs() < 1e-14);
        let nu_c32: f32 = critical_frequency_infinite();
        assert!((nu_c32 as f64 - nu_c).abs() < 1e-6);
    }
}

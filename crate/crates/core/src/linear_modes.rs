//! Normal modes of the linear ring chain.
//!
//! The ring holds `N` ions at sites `j = 1..N` with periodic boundaries.
//! Wave numbers are `k = 2πn/N` (units `1/a`) for `n = 0..=N/2`; modes with
//! `0 < n < N/2` come in parity pairs, `n = 0` is the even bulk mode and
//! `n = N/2` the odd zigzag mode. Dispersion sums run over `j = 1..=N/2`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ChainError, Result};
use crate::model::check_ion_count;
use crate::num::Real;

/// Radicands with `|ω²| ≤ CLAMP_WINDOW` are numerically zero soft modes.
pub const CLAMP_WINDOW: f64 = 1e-12;

/// Minimum number of grid points used by [`max_group_velocity`].
pub const GROUP_VELOCITY_GRID: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> char {
        match self {
            Parity::Even => '+',
            Parity::Odd => '-',
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign())
    }
}

/// Mode label of the linear chain. `k` is kept as the integer `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: usize,
    pub parity: Parity,
}

impl ModeIndex {
    pub fn wave_number<T: Real>(&self, n_ions: usize) -> T {
        wave_number(self.n, n_ions)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={},{})", self.n, self.parity)
    }
}

pub fn wave_number<T: Real>(n: usize, n_ions: usize) -> T {
    T::TAU() * T::from_count(n) / T::from_count(n_ions)
}

/// All `N` modes of one branch, ordered by `n` then parity (`+` before `−`).
pub fn enumerate_modes(n_ions: usize) -> Result<Vec<ModeIndex>> {
    check_ion_count(n_ions)?;
    let half = n_ions / 2;
    let mut modes = Vec::with_capacity(n_ions);
    for n in 0..=half {
        if n != half {
            modes.push(ModeIndex { n, parity: Parity::Even });
        }
        if n != 0 {
            modes.push(ModeIndex { n, parity: Parity::Odd });
        }
    }
    Ok(modes)
}

/// `Σ_{j=1}^{N/2} j⁻³ sin²(jk/2)`, summed from the smallest term.
pub fn coulomb_lattice_sum<T: Real>(k: T, n_ions: usize) -> T {
    let half = T::lit(0.5);
    (1..=n_ions / 2)
        .rev()
        .map(|j| {
            let jf = T::from_count(j);
            let s = (jf * k * half).sin();
            s * s / (jf * jf * jf)
        })
        .sum()
}

/// Lattice sums at every `k = 2πn/N`, `n = 0..=N/2`, using the exact reduction
/// `jk/2 = π (nj mod N) / N`.
fn lattice_sums_on_modes<T: Real>(n_ions: usize) -> Vec<T> {
    let sin2: Vec<T> = (0..n_ions)
        .map(|m| {
            let s = (T::PI() * T::from_count(m) / T::from_count(n_ions)).sin();
            s * s
        })
        .collect();
    (0..=n_ions / 2)
        .map(|n| {
            (1..=n_ions / 2)
                .rev()
                .map(|j| {
                    let jf = T::from_count(j);
                    sin2[(n * j) % n_ions] / (jf * jf * jf)
                })
                .sum()
        })
        .collect()
}

/// Axial dispersion `ω_x(k) = sqrt(8 Σ j⁻³ sin²(jk/2))`.
pub fn dispersion_axial<T: Real>(k: T, n_ions: usize) -> T {
    (T::lit(8.0) * coulomb_lattice_sum(k, n_ions)).sqrt()
}

fn transverse_from_sum<T: Real>(sum: T, nu_t: T) -> Result<T> {
    let radicand = nu_t * nu_t - T::lit(4.0) * sum;
    if radicand.abs() <= T::tolerance(CLAMP_WINDOW, nu_t * nu_t) {
        return Ok(T::zero());
    }
    if radicand > T::zero() {
        return Ok(radicand.sqrt());
    }
    Err(ChainError::UnstableLinearPhase(format!(
        "ω_y² = {radicand:e} < 0 at ν_t = {nu_t}: chain is below its critical point"
    )))
}

/// Transverse dispersion `ω_y(k) = sqrt(ν_t² − 4 Σ j⁻³ sin²(jk/2))`.
pub fn dispersion_transverse<T: Real>(k: T, nu_t: T, n_ions: usize) -> Result<T> {
    transverse_from_sum(coulomb_lattice_sum(k, n_ions), nu_t)
}

/// Critical transverse frequency of the finite ring, `sqrt(4 Σ_{j odd ≤ N/2} j⁻³)`.
///
/// At this `ν_t` the zigzag mode `k = π/a` is soft.
pub fn critical_frequency_finite<T: Real>(n_ions: usize) -> T {
    let sum: T = (1..=n_ions / 2)
        .rev()
        .filter(|j| j % 2 == 1)
        .map(|j| {
            let jf = T::from_count(j);
            T::one() / (jf * jf * jf)
        })
        .sum();
    (T::lit(4.0) * sum).sqrt()
}

/// Which displacement direction a [`ModeSet`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Axial,
    Transverse,
}

/// Mode frequencies of one branch.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet<T> {
    pub n_ions: usize,
    pub branch: Branch,
    pub modes: Vec<(ModeIndex, T)>,
}

impl<T: Real> ModeSet<T> {
    pub fn axial(n_ions: usize) -> Result<Self> {
        let sums = {
            check_ion_count(n_ions)?;
            lattice_sums_on_modes::<T>(n_ions)
        };
        let modes = enumerate_modes(n_ions)?.into_iter().map(|m| (m, (T::lit(8.0) * sums[m.n]).sqrt())).collect();
        Ok(Self { n_ions, branch: Branch::Axial, modes })
    }

    pub fn transverse(nu_t: T, n_ions: usize) -> Result<Self> {
        check_ion_count(n_ions)?;
        let sums = lattice_sums_on_modes::<T>(n_ions);
        let modes = enumerate_modes(n_ions)?
            .into_iter()
            .map(|m| Ok((m, transverse_from_sum(sums[m.n], nu_t)?)))
            .collect::<Result<_>>()?;
        Ok(Self { n_ions, branch: Branch::Transverse, modes })
    }

    pub fn frequencies(&self) -> impl Iterator<Item = T> + '_ {
        self.modes.iter().map(|(_, w)| *w)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Frequency of the mode at `k = π/a` (the soft zigzag mode for the transverse branch).
    pub fn zone_boundary_frequency(&self) -> T {
        let half = self.n_ions / 2;
        self.modes.iter().find(|(m, _)| m.n == half).map(|(_, w)| *w).expect("mode n = N/2 always exists")
    }
}

/// Orthogonal transformation between site displacements and normal modes.
///
/// Row `r` corresponds to site `j = r + 1`; columns follow [`enumerate_modes`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMatrix<T: Real> {
    pub modes: Vec<ModeIndex>,
    pub matrix: DMatrix<T>,
}

impl<T: Real> ModeMatrix<T> {
    pub fn n_ions(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry `R_{site, mode}` with `site` in `1..=N`.
    pub fn entry(&self, site: usize, column: usize) -> T {
        self.matrix[(site - 1, column)]
    }

    /// `max |RᵀR − I|`.
    pub fn orthogonality_error(&self) -> T {
        let n = self.matrix.ncols();
        let gram = self.matrix.transpose() * &self.matrix;
        let eye = DMatrix::<T>::identity(n, n);
        (gram - eye).iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    /// `Σ_{k,σ} R²_{site,kσ}`; equals one for an orthogonal matrix.
    pub fn row_norm_squared(&self, site: usize) -> T {
        self.matrix.row(site - 1).iter().map(|x| *x * *x).sum()
    }
}

/// Builds the cos/sin Fourier mode matrix of the ring.
pub fn mode_matrix<T: Real>(n_ions: usize) -> Result<ModeMatrix<T>> {
    let modes = enumerate_modes(n_ions)?;
    let nf = T::from_count(n_ions);
    let pair = (T::lit(2.0) / nf).sqrt();
    let single = (T::one() / nf).sqrt();
    let half = n_ions / 2;
    let matrix = DMatrix::from_fn(n_ions, n_ions, |row, col| {
        let j = row + 1;
        let ModeIndex { n, parity } = modes[col];
        // jka = 2π (nj mod N) / N
        let angle = T::TAU() * T::from_count((n * j) % n_ions) / nf;
        if n == 0 {
            single
        } else if n == half {
            if j % 2 == 0 {
                single
            } else {
                -single
            }
        } else {
            match parity {
                Parity::Even => pair * angle.cos(),
                Parity::Odd => pair * angle.sin(),
            }
        }
    });
    Ok(ModeMatrix { modes, matrix })
}

/// `dω_y²/dk = −2 Σ j⁻² sin(jk)` (units ω₀² a).
pub fn transverse_slope_squared<T: Real>(k: T, n_ions: usize) -> T {
    let s: T = (1..=n_ions / 2)
        .rev()
        .map(|j| {
            let jf = T::from_count(j);
            (jf * k).sin() / (jf * jf)
        })
        .sum();
    -T::lit(2.0) * s
}

/// Group velocity `|dω_y/dk|` of the transverse branch, in units of a ω₀.
pub fn group_velocity<T: Real>(k: T, nu_t: T, n_ions: usize) -> Result<T> {
    if !(k > T::zero() && k < T::PI()) {
        return Err(ChainError::invalid(format!("group velocity needs 0 < k < π/a, got {k}")));
    }
    let omega = dispersion_transverse(k, nu_t, n_ions)?;
    if omega <= T::zero() {
        return Err(ChainError::SoftModeSingularity(format!("ω_y({k}) = 0")));
    }
    Ok(transverse_slope_squared(k, n_ions).abs() / (T::lit(2.0) * omega))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupVelocityMax<T> {
    pub v_max: T,
    pub k_star: T,
}

/// Maximum transverse group velocity over `(0, π/a)`.
pub fn max_group_velocity<T: Real>(nu_t: T, n_ions: usize) -> Result<GroupVelocityMax<T>> {
    max_group_velocity_on_grid(nu_t, n_ions, GROUP_VELOCITY_GRID, T::lit(0.5))
}

/// Grid scan with `points` cells (sampled at fraction `offset` inside each
/// cell) followed by golden-section refinement of the best bracket.
pub fn max_group_velocity_on_grid<T: Real>(
    nu_t: T,
    n_ions: usize,
    points: usize,
    offset: T,
) -> Result<GroupVelocityMax<T>> {
    check_ion_count(n_ions)?;
    if points < 2048 {
        return Err(ChainError::invalid(format!("group velocity grid needs ≥ 2048 points, got {points}")));
    }
    if !(offset > T::zero() && offset < T::one()) {
        return Err(ChainError::invalid("grid offset must lie in (0, 1)"));
    }
    let step = T::PI() / T::from_count(points);
    let at = |i: usize| (T::from_count(i) + offset) * step;
    let mut best = (0usize, -T::one());
    for i in 0..points {
        let v = group_velocity(at(i), nu_t, n_ions)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let tiny = T::tolerance(1e-12, T::one());
    let mut lo = if best.0 == 0 { tiny } else { at(best.0 - 1) };
    let mut hi = if best.0 + 1 == points { T::PI() - tiny } else { at(best.0 + 1) };

    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let tol = T::lit(1e-9).max(T::machine_epsilon().sqrt());
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = group_velocity(c, nu_t, n_ions)?;
    let mut fd = group_velocity(d, nu_t, n_ions)?;
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = group_velocity(c, nu_t, n_ions)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = group_velocity(d, nu_t, n_ions)?;
        }
    }
    let k_star = (lo + hi) / T::lit(2.0);
    let v = group_velocity(k_star, nu_t, n_ions)?;
    Ok(GroupVelocityMax { v_max: v.max(best.1), k_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::critical_frequency_infinite;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn enumeration_small_ring() {
        let m = enumerate_modes(4).unwrap();
        let expect = [(0, Parity::Even), (1, Parity::Even), (1, Parity::Odd), (2, Parity::Odd)];
        assert_eq!(m.len(), 4);
        for (got, (n, p)) in m.iter().zip(expect) {
            assert_eq!((got.n, got.parity), (n, p));
        }
    }

    #[test]
    fn enumeration_counts() {
        let m = enumerate_modes(100).unwrap();
        assert_eq!(m.len(), 100);
        let doubly = (1..50).filter(|n| m.iter().filter(|x| x.n == *n).count() == 2).count();
        assert_eq!(doubly, 49);
        assert_eq!(m.iter().filter(|x| x.n == 0 || x.n == 50).count(), 2);
        assert!(matches!(enumerate_modes(3), Err(ChainError::InvalidParameter(_))));
        assert!(enumerate_modes(2).is_err());
    }

    #[test]
    fn axial_values() {
        assert_eq!(dispersion_axial(0.0f64, 100), 0.0);
        assert_relative_eq!(dispersion_axial(std::f64::consts::PI, 4), 8f64.sqrt(), max_relative = 1e-14);
        let grid: Vec<f64> = (0..=100).map(|i| std::f64::consts::PI * i as f64 / 100.0).collect();
        for w in grid.windows(2) {
            assert!(dispersion_axial(w[1], 100) > dispersion_axial(w[0], 100));
        }
    }

    #[test]
    fn transverse_values() {
        assert_eq!(dispersion_transverse(0.0f64, 2.3, 10).unwrap(), 2.3);
        let w = dispersion_transverse(std::f64::consts::FRAC_PI_2, 2.5, 4).unwrap();
        assert_relative_eq!(w, 3.75f64.sqrt(), max_relative = 1e-14);
        assert!((w - 1.9365).abs() < 1e-4);
        for n in [4usize, 6, 100] {
            let nc: f64 = critical_frequency_finite(n);
            assert_eq!(dispersion_transverse(std::f64::consts::PI, nc, n).unwrap(), 0.0);
        }
        assert!(matches!(
            dispersion_transverse(std::f64::consts::PI, 1.9f64, 4),
            Err(ChainError::UnstableLinearPhase(_))
        ));
    }

    #[test]
    fn finite_critical_frequency() {
        assert_relative_eq!(critical_frequency_finite::<f64>(4), 2.0, max_relative = 1e-15);
        let six: f64 = critical_frequency_finite(6);
        assert_relative_eq!(six, (4.0f64 * (1.0 + 1.0 / 27.0)).sqrt(), max_relative = 1e-15);
        assert!((six - 2.0367).abs() < 1e-4);
        let big: f64 = critical_frequency_finite(10_000);
        let inf: f64 = critical_frequency_infinite();
        assert!(big < inf && inf - big < 1e-4);
        let mut prev = 0.0;
        for n in (4..400).step_by(2) {
            let c: f64 = critical_frequency_finite(n);
            assert!(c >= prev && c <= inf);
            prev = c;
        }
    }

    #[test]
    fn mode_matrix_small_ring() {
        let r = mode_matrix::<f64>(4).unwrap();
        assert_relative_eq!(r.entry(1, 0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.entry(1, 3), -0.5, max_relative = 1e-15);
        assert!(r.entry(1, 1).abs() < 1e-15);
        assert_relative_eq!(r.entry(1, 2), 0.5f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn mode_matrix_orthogonal_with_unit_rows() {
        for n in [4usize, 10, 100] {
            let r = mode_matrix::<f64>(n).unwrap();
            assert!(r.orthogonality_error() < 1e-10);
            // brute-force row sum over modes
            let mut s = 0.0;
            for c in 0..n {
                s += r.entry(1, c).powi(2);
            }
            assert!((s - 1.0).abs() < 1e-12);
            assert!((r.row_norm_squared(1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_set_matches_direct_dispersion() {
        let set = ModeSet::<f64>::transverse(2.3, 60).unwrap();
        for (m, w) in &set.modes {
            let k: f64 = m.wave_number(60);
            assert_relative_eq!(*w, dispersion_transverse(k, 2.3, 60).unwrap(), max_relative = 1e-12);
        }
        let ax = ModeSet::<f64>::axial(60).unwrap();
        for (m, w) in &ax.modes {
            let k: f64 = m.wave_number(60);
            assert!((w - dispersion_axial(k, 60)).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_pairs_degenerate() {
        let set = ModeSet::<f64>::transverse(2.1, 40).unwrap();
        for w in set.modes.windows(2) {
            if w[0].0.n == w[1].0.n {
                assert_eq!(w[0].1, w[1].1);
            }
        }
    }

    #[test]
    fn group_velocity_matches_finite_difference() {
        let nu = critical_frequency_infinite::<f64>() + 1e-3;
        let n = 1000;
        let h = 1e-6;
        for i in 1..=50 {
            let k = std::f64::consts::PI * i as f64 / 51.0;
            let v = group_velocity(k, nu, n).unwrap();
            let fd = (dispersion_transverse(k + h, nu, n).unwrap() - dispersion_transverse(k - h, nu, n).unwrap())
                / (2.0 * h);
            assert!((v - fd.abs()).abs() <= 1e-6 * v.max(1e-12), "k={k} v={v} fd={fd}");
        }
        assert!(group_velocity(1e-9, nu, n).unwrap() < 1e-6);
    }

    #[test]
    fn group_velocity_soft_mode_and_domain() {
        let nc: f64 = critical_frequency_finite(8);
        let k = std::f64::consts::PI * (1.0 - 1e-14);
        assert!(group_velocity(std::f64::consts::PI, nc, 8).is_err());
        let _ = group_velocity(k, nc, 8);
        assert!(matches!(group_velocity(0.0, 2.5, 8), Err(ChainError::InvalidParameter(_))));
    }

    #[test]
    fn max_group_velocity_grid_offset_independent() {
        let nu = critical_frequency_infinite::<f64>() + 1e-2;
        let a = max_group_velocity_on_grid(nu, 200, 2048, 0.5).unwrap();
        let b = max_group_velocity_on_grid(nu, 200, 3001, 0.13).unwrap();
        assert!((a.k_star - b.k_star).abs() < 1e-4);
        assert!((a.v_max - b.v_max).abs() < 1e-10);
    }

    #[test]
    fn max_group_velocity_below_trap_frequency() {
        for d in [1e-1, 1e-2, 1e-3] {
            let nu = critical_frequency_infinite::<f64>() + d;
            let g = max_group_velocity(nu, 1000).unwrap();
            assert!(g.v_max < nu);
        }
    }

    #[test]
    fn single_precision_spectrum() {
        let set = ModeSet::<f32>::transverse(2.5, 40).unwrap();
        let set64 = ModeSet::<f64>::transverse(2.5, 40).unwrap();
        for ((_, a), (_, b)) in set.modes.iter().zip(&set64.modes) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn transverse_round_trip(n_half in 2usize..80, n in 0usize..80, d in 0.01f64..2.0) {
            let n_ions = 2 * n_half;
            let n = n % (n_half + 1);
            let nu = critical_frequency_finite::<f64>(n_ions) + d;
            let k: f64 = wave_number(n, n_ions);
            let w = dispersion_transverse(k, nu, n_ions).unwrap();
            let back = w * w + 4.0 * coulomb_lattice_sum(k, n_ions);
            prop_assert!((back - nu * nu).abs() < 1e-12 * nu * nu.max(1.0));
        }

        #[test]
        fn monotone_branches(n_half in 2usize..60, d in 0.01f64..1.0) {
            let n_ions = 2 * n_half;
            let nu = critical_frequency_finite::<f64>(n_ions) + d;
            let ks: Vec<f64> = (0..=256).map(|i| std::f64::consts::PI * i as f64 / 256.0).collect();
            for w in ks.windows(2) {
                prop_assert!(dispersion_transverse(w[1], nu, n_ions).unwrap()
                    <= dispersion_transverse(w[0], nu, n_ions).unwrap() + 1e-12);
                prop_assert!(dispersion_axial(w[1], n_ions) + 1e-12 >= dispersion_axial(w[0], n_ions));
            }
        }
    }
}

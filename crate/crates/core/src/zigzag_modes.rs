//! Zigzag phase of the ring chain below the critical transverse frequency.
//!
//! The equilibrium is `x_j = j`, `y_j = (−1)ʲ b/2`. Pair interactions use the
//! periodic images at axial displacements `d = ±1, …, ±N/2`, so the antipodal
//! ion enters through both of its images. With this convention the `b = 0`
//! Hessian reproduces the linear-chain dispersion sums exactly.
//!
//! Displacements are ordered `ρ = (q_1, w_1, …, q_N, w_N)`.

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;

use crate::error::{ChainError, Result};
use crate::linear_modes::{critical_frequency_finite, wave_number, Parity};
use crate::num::Real;

/// Eigenvalues with `|λ|` inside this window are treated as exact zeros;
/// anything more negative marks an unstable configuration.
pub const EIGEN_ZERO_WINDOW: f64 = 1e-10;
/// Convergence target for `|∂E/∂b|` at the equilibrium.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
/// Relative eigenvalue gap below which modes are grouped into one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

fn check_commensurate(n_ions: usize) -> Result<()> {
    if n_ions < 4 || !n_ions.is_multiple_of(4) {
        return Err(ChainError::invalid(format!("zigzag on a ring needs N divisible by 4, got N = {n_ions}")));
    }
    Ok(())
}

/// Transverse equilibrium coordinate of `site` (1-based).
fn offset<T: Real>(site: usize, b: T) -> T {
    let half = b / T::lit(2.0);
    if site.is_multiple_of(2) {
        half
    } else {
        -half
    }
}

fn odd_image_sum<T: Real>(b: T, n_ions: usize) -> T {
    let b2 = b * b;
    (1..=n_ions / 2)
        .rev()
        .filter(|d| d % 2 == 1)
        .map(|d| {
            let df = T::from_count(d);
            let r2 = df * df + b2;
            T::one() / (r2 * r2.sqrt())
        })
        .sum()
}

/// Potential energy per ion (units m ω₀² a²) for zigzag amplitude `b`.
pub fn zigzag_energy<T: Real>(b: T, nu_t: T, n_ions: usize) -> T {
    let b2 = b * b;
    let coulomb: T = (1..=n_ions / 2)
        .rev()
        .map(|d| {
            let df = T::from_count(d);
            let r2 = if d % 2 == 1 { df * df + b2 } else { df * df };
            T::one() / r2.sqrt()
        })
        .sum();
    coulomb + nu_t * nu_t * b2 / T::lit(8.0)
}

/// `∂E/∂b` of [`zigzag_energy`].
pub fn zigzag_energy_gradient<T: Real>(b: T, nu_t: T, n_ions: usize) -> T {
    b * (nu_t * nu_t / T::lit(4.0) - odd_image_sum(b, n_ions))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZigzagEquilibrium<T> {
    pub n_ions: usize,
    pub nu_t: T,
    /// Peak-to-peak transverse amplitude (units a).
    pub b: T,
    /// Potential energy per ion (units m ω₀² a²).
    pub energy: T,
    pub gradient: T,
}

pub fn zigzag_equilibrium<T: Real>(nu_t: T, n_ions: usize) -> Result<ZigzagEquilibrium<T>> {
    check_commensurate(n_ions)?;
    if !(nu_t > T::zero() && nu_t.is_finite()) {
        return Err(ChainError::invalid(format!("nu_t must be positive, got {nu_t}")));
    }
    let critical: T = critical_frequency_finite(n_ions);
    let finish = |b: T| {
        let gradient = zigzag_energy_gradient(b, nu_t, n_ions);
        ZigzagEquilibrium { n_ions, nu_t, b, energy: zigzag_energy(b, nu_t, n_ions), gradient }
    };
    if nu_t >= critical {
        return Ok(finish(T::zero()));
    }

    // Nonzero roots solve odd_image_sum(b) = ν²/4; the sum decreases monotonically in b.
    let target = nu_t * nu_t / T::lit(4.0);
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut expansions = 0;
    while odd_image_sum(hi, n_ions) > target {
        lo = hi;
        hi *= T::lit(2.0);
        expansions += 1;
        if expansions > 200 {
            return Err(ChainError::NumericalFailure(format!(
                "could not bracket the zigzag amplitude at ν_t = {nu_t}"
            )));
        }
    }
    for _ in 0..400 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if odd_image_sum(mid, n_ions) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eq = finish((lo + hi) / T::lit(2.0));
    if eq.gradient.abs() > T::tolerance(GRADIENT_TOLERANCE, T::one()) {
        return Err(ChainError::NumericalFailure(format!(
            "zigzag minimiser stalled with |∂E/∂b| = {:e}",
            eq.gradient.abs()
        )));
    }
    Ok(eq)
}

/// Analytic Hessian of the ring potential at the given equilibrium (units m ω₀²).
pub fn zigzag_hessian<T: Real>(eq: &ZigzagEquilibrium<T>) -> DMatrix<T> {
    let n = eq.n_ions;
    let dim = 2 * n;
    let three = T::lit(3.0);
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|s| {
            let mut row_q = vec![T::zero(); dim];
            let mut row_w = vec![T::zero(); dim];
            let y_s = offset(s + 1, eq.b);
            for d in 1..=n / 2 {
                for forward in [true, false] {
                    let p = if forward { (s + d) % n } else { (s + n - d) % n };
                    let dx = if forward { T::from_count(d) } else { -T::from_count(d) };
                    let dy = offset(p + 1, eq.b) - y_s;
                    let r2 = dx * dx + dy * dy;
                    let r5 = r2 * r2 * r2.sqrt();
                    let hxx = (three * dx * dx - r2) / r5;
                    let hxy = three * dx * dy / r5;
                    let hyy = (three * dy * dy - r2) / r5;
                    row_q[2 * s] += hxx;
                    row_q[2 * s + 1] += hxy;
                    row_w[2 * s] += hxy;
                    row_w[2 * s + 1] += hyy;
                    row_q[2 * p] -= hxx;
                    row_q[2 * p + 1] -= hxy;
                    row_w[2 * p] -= hxy;
                    row_w[2 * p + 1] -= hyy;
                }
            }
            row_w[2 * s + 1] += eq.nu_t * eq.nu_t;
            [row_q, row_w]
        })
        .collect();
    DMatrix::from_fn(dim, dim, |r, c| rows[r][c])
}

/// Normal modes of the in-plane zigzag Hessian.
#[derive(Clone, Debug)]
pub struct ZigzagSpectrum<T: Real> {
    pub equilibrium: ZigzagEquilibrium<T>,
    pub hessian: DMatrix<T>,
    /// Ascending eigenvalues `ω²`, numerically-zero values snapped to 0.
    pub eigenvalues: Vec<T>,
    pub frequencies: Vec<T>,
    /// Orthogonal matrix `R^zz`: row = coordinate in `ρ`, column = mode.
    pub modes: DMatrix<T>,
}

impl<T: Real> ZigzagSpectrum<T> {
    pub fn n_ions(&self) -> usize {
        self.equilibrium.n_ions
    }

    /// Row of `R^zz` for the transverse coordinate `w` of `site` (1-based).
    pub fn transverse_row(&self, site: usize) -> usize {
        2 * (site - 1) + 1
    }

    pub fn axial_row(&self, site: usize) -> usize {
        2 * (site - 1)
    }

    /// `max |R Rᵀ − I|`.
    pub fn orthogonality_error(&self) -> T {
        let dim = self.modes.nrows();
        let gram = &self.modes * self.modes.transpose();
        (gram - DMatrix::<T>::identity(dim, dim)).iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn row_norm_squared(&self, row: usize) -> T {
        self.modes.row(row).iter().map(|x| *x * *x).sum()
    }

    /// Numerical eigenvalues grouped with `lambda` within the cluster tolerance.
    fn cluster_around(&self, lambda: T) -> Vec<usize> {
        let tol = T::tolerance(CLUSTER_TOLERANCE, lambda.abs().max(T::one()));
        self.eigenvalues.iter().enumerate().filter(|(_, l)| (**l - lambda).abs() <= tol).map(|(i, _)| i).collect()
    }

    /// How well the numerical eigenspace contains the unit vector `v`.
    ///
    /// Returns the Rayleigh quotient, `1 − ‖P v‖²` with `P` the projector on the
    /// eigenvector cluster at that eigenvalue, and the cluster size.
    pub fn eigenspace_residual(&self, v: &DVector<T>) -> EigenspaceResidual<T> {
        let norm2 = v.norm_squared();
        let kv = &self.hessian * v;
        let lambda = v.dot(&kv) / norm2;
        let cluster = self.cluster_around(lambda);
        let captured: T = cluster
            .iter()
            .map(|&i| {
                let c = self.modes.column(i).dot(v);
                c * c
            })
            .sum::<T>()
            / norm2;
        EigenspaceResidual { eigenvalue: lambda, residual: (T::one() - captured).abs(), cluster_size: cluster.len() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenspaceResidual<T> {
    pub eigenvalue: T,
    pub residual: T,
    pub cluster_size: usize,
}

fn frequency_from_eigenvalue<T: Real>(lambda: T) -> Result<T> {
    let window = T::tolerance(EIGEN_ZERO_WINDOW, T::one());
    if lambda < -window {
        return Err(ChainError::UnstableConfiguration(format!("Hessian eigenvalue {lambda:e} is negative")));
    }
    if lambda.abs() <= window {
        return Ok(T::zero());
    }
    Ok(lambda.sqrt())
}

/// Diagonalises the zigzag Hessian at the equilibrium for `nu_t`.
pub fn zigzag_spectrum<T: Real>(nu_t: T, n_ions: usize) -> Result<ZigzagSpectrum<T>> {
    let equilibrium = zigzag_equilibrium(nu_t, n_ions)?;
    spectrum_at(equilibrium)
}

/// Diagonalises the Hessian at a given (possibly hand-built) equilibrium.
pub fn spectrum_at<T: Real>(equilibrium: ZigzagEquilibrium<T>) -> Result<ZigzagSpectrum<T>> {
    let hessian = zigzag_hessian(&equilibrium);
    let dim = hessian.nrows();
    // Axial translation is an exact null vector. Shifting it above the spectrum
    // keeps it from mixing with a nearly soft mode during diagonalisation.
    let translation = structural_patterns::<T>(equilibrium.n_ions).swap_remove(0).1;
    let gershgorin =
        (0..dim).map(|r| hessian.row(r).iter().fold(T::zero(), |a, x| a + x.abs())).fold(T::zero(), |a, x| a.max(x));
    let shift = T::lit(2.0) * gershgorin + T::one();
    let shifted = &hessian + &translation * translation.transpose() * shift;
    let eig = shifted.symmetric_eigen();
    let top = (0..dim)
        .max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let value = |i: usize| if i == top { T::zero() } else { eig.eigenvalues[i] };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(std::cmp::Ordering::Equal));
    let window = T::tolerance(EIGEN_ZERO_WINDOW, T::one());
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut frequencies = Vec::with_capacity(dim);
    for &i in &order {
        let lambda = value(i);
        frequencies.push(frequency_from_eigenvalue(lambda)?);
        eigenvalues.push(if lambda.abs() <= window { T::zero() } else { lambda });
    }
    let modes = DMatrix::from_fn(dim, dim, |r, c| {
        let i = order[c];
        if i == top {
            translation[r]
        } else {
            eig.eigenvectors[(r, i)]
        }
    });
    Ok(ZigzagSpectrum { equilibrium, hessian, eigenvalues, frequencies, modes })
}

/// Label of one zigzag normal mode, obtained by projecting on the cos/sin ansatz
/// `q_j ∝ cos(k̃ j)`, `w_j ∝ sin((π − k̃) j)` (even) and
/// `q_j ∝ sin(k̃ j)`, `w_j ∝ −cos((π − k̃) j)` (odd).
#[derive(Clone, Debug, PartialEq)]
pub struct ZigzagModeLabel<T> {
    /// Unfolded wave-number index, `k̃ = 2πn/N` with `n = 0..=N/2`.
    pub n: usize,
    /// Folded wave number in `[0, π/2]` (units 1/a).
    pub k: T,
    /// Branch `β = 1..=4`; 1–2 for `k̃ ≤ π/2`, 3–4 for `k̃ > π/2`.
    pub branch: u8,
    pub parity: Parity,
    /// Frequency of the assigned numerical eigenvector.
    pub omega: T,
    /// Frequency of the ansatz block.
    pub ansatz_omega: T,
    /// Amplitudes `(u_β, v_β)` multiplying the cos/sin patterns in `R^zz`.
    pub coefficients: (T, T),
    /// `1 − ‖P u‖²` for the ansatz eigenvector `u` and the numerical cluster projector `P`.
    pub residual: T,
    /// Assigned column of `R^zz`.
    pub column: usize,
    /// Set when the numerical cluster is larger than the parity degeneracy explains.
    pub degenerate_cluster: bool,
}

#[derive(Clone, Debug)]
pub struct ZigzagClassification<T> {
    pub labels: Vec<ZigzagModeLabel<T>>,
    pub max_residual: T,
    /// `max |λ_ansatz − λ_numerical|` after sorted assignment.
    pub max_eigenvalue_mismatch: T,
    pub degenerate_clusters: usize,
}

struct AnsatzVector<T: Real> {
    axial: bool,
    vector: DVector<T>,
}

fn ansatz_basis<T: Real>(n: usize, parity: Parity, n_ions: usize) -> Vec<AnsatzVector<T>> {
    let half = n_ions / 2;
    let edge = n == 0 || n == half;
    let nf = T::from_count(n_ions);
    let mut out = Vec::with_capacity(2);
    let has_axial = !(parity == Parity::Odd && edge);
    let has_transverse = !(parity == Parity::Even && edge);
    if has_axial {
        let mut v = DVector::<T>::zeros(2 * n_ions);
        for j in 1..=n_ions {
            let angle = T::TAU() * T::from_count((n * j) % n_ions) / nf;
            v[2 * (j - 1)] = match parity {
                Parity::Even => angle.cos(),
                Parity::Odd => angle.sin(),
            };
        }
        let norm = v.norm();
        out.push(AnsatzVector { axial: true, vector: v / norm });
    }
    if has_transverse {
        let mut v = DVector::<T>::zeros(2 * n_ions);
        for j in 1..=n_ions {
            // (π − k̃) j = π ((N − 2n) j mod 2N) / N
            let angle = T::PI() * T::from_count(((n_ions - 2 * n) * j) % (2 * n_ions)) / nf;
            v[2 * (j - 1) + 1] = match parity {
                Parity::Even => angle.sin(),
                Parity::Odd => -angle.cos(),
            };
        }
        let norm = v.norm();
        out.push(AnsatzVector { axial: false, vector: v / norm });
    }
    out
}

/// Assigns `(k, β, σ)` labels to every zigzag mode and reports projection residuals.
pub fn classify_zigzag_modes<T: Real>(spectrum: &ZigzagSpectrum<T>) -> Result<ZigzagClassification<T>> {
    let n_ions = spectrum.n_ions();
    let half = n_ions / 2;
    let quarter = n_ions / 4;
    let scale = (T::from_count(n_ions) / T::lit(2.0)).sqrt().recip();

    struct Pending<T: Real> {
        n: usize,
        branch: u8,
        parity: Parity,
        lambda: T,
        coefficients: (T, T),
        vector: DVector<T>,
        block_size: usize,
    }

    let sectors: Vec<(usize, Parity)> = (0..=half).flat_map(|n| [(n, Parity::Even), (n, Parity::Odd)]).collect();
    let pending: Vec<Pending<T>> = sectors
        .par_iter()
        .flat_map_iter(|&(n, parity)| {
            let basis = ansatz_basis::<T>(n, parity, n_ions);
            let base: u8 = if n <= quarter { 1 } else { 3 };
            let kv: Vec<DVector<T>> = basis.iter().map(|b| &spectrum.hessian * &b.vector).collect();
            let mut out = Vec::with_capacity(2);
            if basis.len() == 1 {
                let b = &basis[0];
                let lambda = b.vector.dot(&kv[0]);
                let coeff = if b.axial { (T::one(), T::zero()) } else { (T::zero(), T::one()) };
                out.push(Pending {
                    n,
                    branch: base + if b.axial { 0 } else { 1 },
                    parity,
                    lambda,
                    coefficients: coeff,
                    vector: b.vector.clone(),
                    block_size: 1,
                });
            } else {
                let block = Matrix2::new(
                    basis[0].vector.dot(&kv[0]),
                    basis[0].vector.dot(&kv[1]),
                    basis[1].vector.dot(&kv[0]),
                    basis[1].vector.dot(&kv[1]),
                );
                let eig = block.symmetric_eigen();
                let mut idx = [0usize, 1];
                idx.sort_by(|&a, &b| {
                    eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal)
                });
                for (rank, &i) in idx.iter().enumerate() {
                    let mut c = (eig.eigenvectors[(0, i)], eig.eigenvectors[(1, i)]);
                    // fix the overall sign: dominant component positive
                    if (c.0.abs() >= c.1.abs() && c.0 < T::zero()) || (c.1.abs() > c.0.abs() && c.1 < T::zero()) {
                        c = (-c.0, -c.1);
                    }
                    let vector = &basis[0].vector * c.0 + &basis[1].vector * c.1;
                    out.push(Pending {
                        n,
                        branch: base + rank as u8,
                        parity,
                        lambda: eig.eigenvalues[i],
                        coefficients: c,
                        vector,
                        block_size: 2,
                    });
                }
            }
            out
        })
        .collect();

    if pending.len() != 2 * n_ions {
        return Err(ChainError::NumericalFailure(format!(
            "ansatz produced {} modes for {} coordinates",
            pending.len(),
            2 * n_ions
        )));
    }

    let mut order: Vec<usize> = (0..pending.len()).collect();
    order.sort_by(|&a, &b| pending[a].lambda.partial_cmp(&pending[b].lambda).unwrap_or(std::cmp::Ordering::Equal));

    let mut labels = Vec::with_capacity(pending.len());
    let mut max_residual = T::zero();
    let mut max_mismatch = T::zero();
    let mut degenerate = 0usize;
    for (column, &pi) in order.iter().enumerate() {
        let p = &pending[pi];
        let res = spectrum.eigenspace_residual(&p.vector);
        // parity partners (interior n) share one eigenvalue
        let expected = if p.n == 0 || p.n == half { 1 } else { 2 };
        let accidental = res.cluster_size > expected;
        if accidental {
            degenerate += 1;
        }
        max_residual = max_residual.max(res.residual);
        max_mismatch = max_mismatch.max((p.lambda - spectrum.eigenvalues[column]).abs());
        let k_tilde: T = wave_number(p.n, n_ions);
        let k = if p.n <= quarter { k_tilde } else { T::PI() - k_tilde };
        let _ = p.block_size;
        labels.push(ZigzagModeLabel {
            n: p.n,
            k,
            branch: p.branch,
            parity: p.parity,
            omega: spectrum.frequencies[column],
            ansatz_omega: frequency_from_eigenvalue(p.lambda)?,
            coefficients: (p.coefficients.0 * scale, p.coefficients.1 * scale),
            residual: res.residual,
            column,
            degenerate_cluster: accidental,
        });
    }
    Ok(ZigzagClassification {
        labels,
        max_residual,
        max_eigenvalue_mismatch: max_mismatch,
        degenerate_clusters: degenerate,
    })
}

/// The four rigid/alternating patterns of the zigzag: `(name, unit vector)`.
///
/// Uniform `q`, uniform `w`, alternating `(−1)ʲ q` and alternating `(−1)ʲ w`.
pub fn structural_patterns<T: Real>(n_ions: usize) -> Vec<(&'static str, DVector<T>)> {
    let amp = (T::one() / T::from_count(n_ions)).sqrt();
    let build = |axial: bool, alternating: bool| {
        let mut v = DVector::<T>::zeros(2 * n_ions);
        for j in 1..=n_ions {
            let sign = if alternating && j % 2 == 1 { -T::one() } else { T::one() };
            v[2 * (j - 1) + usize::from(!axial)] = sign * amp;
        }
        v
    };
    vec![
        ("bulk_x", build(true, false)),
        ("bulk_y", build(false, false)),
        ("zigzag_x", build(true, true)),
        ("zigzag_y", build(false, true)),
    ]
}

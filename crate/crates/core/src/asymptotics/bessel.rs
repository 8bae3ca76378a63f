//! Bessel function of the second kind, order zero.

use crate::error::{ChainError, Result};
use crate::num::Real;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Switch from the power series to the Hankel expansion.
const SERIES_LIMIT: f64 = 12.0;

/// `Y₀(x)` for `x > 0`, absolute error below `1e-10` in `f64`.
///
/// Evaluated internally in `f64`: ascending series below `x = 12`, Hankel
/// asymptotic expansion truncated at its smallest term above.
pub fn bessel_y0<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(ChainError::invalid(format!("Y0 needs x > 0, got {x}")));
    }
    let xf = x.to_f64_lossy();
    let y = if xf < SERIES_LIMIT { series(xf) } else { hankel(xf) };
    Ok(T::lit(y))
}

fn series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut j0 = 1.0;
    let mut tail = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        tail -= harmonic * term;
        if term.abs() * harmonic < 1e-17 * (j0.abs() + tail.abs()).max(1e-300) {
            break;
        }
    }
    std::f64::consts::FRAC_2_PI * (((x / 2.0).ln() + EULER_GAMMA) * j0 + tail)
}

fn hankel(x: f64) -> f64 {
    // c_k = a_k(0) / x^k with a_k(0) = Π (−(2j−1)²) / (k! 8^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut c: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        c *= -odd * odd / (k as f64 * 8.0 * x);
        if c.abs() >= prev || c.abs() < 1e-18 {
            break;
        }
        prev = c.abs();
        // P = c₀ − c₂ + c₄ − …, Q = c₁ − c₃ + …
        match k % 4 {
            0 => p += c,
            1 => q += c,
            2 => p -= c,
            _ => q -= c,
        }
    }
    let chi = x - std::f64::consts::FRAC_PI_4;
    (std::f64::consts::FRAC_2_PI / x).sqrt() * (p * chi.sin() + q * chi.cos())
}

//! Orthonormal complex spherical harmonics with the Condon–Shortley phase.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An `(order, degree)` pair with `|degree| <= order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicIndex {
    order: usize,
    degree: i64,
}

impl HarmonicIndex {
    pub fn new(order: usize, degree: i64) -> Result<Self> {
        if degree.unsigned_abs() as usize > order {
            return Err(Error::domain(format!(
                "|m| = {} exceeds n = {order}",
                degree.abs()
            )));
        }
        Ok(Self { order, degree })
    }

    pub fn order(self) -> usize {
        self.order
    }

    pub fn degree(self) -> i64 {
        self.degree
    }

    /// Zero-based flat position `n² + n + m`. The one-based position
    /// `n² + n + m + 1` is the row of the unit entry in a mode target vector.
    pub fn flat(self) -> usize {
        ((self.order * self.order + self.order) as i64 + self.degree) as usize
    }

    pub fn from_flat(flat: usize) -> Self {
        let order = (flat as f64).sqrt().floor() as usize;
        // guard against rounding in sqrt for perfect squares
        let order = if (order + 1) * (order + 1) <= flat {
            order + 1
        } else if order * order > flat {
            order - 1
        } else {
            order
        };
        let degree = flat as i64 - (order * order + order) as i64;
        Self { order, degree }
    }

    /// All indices up to and including `max_order`, in flat order.
    pub fn up_to(max_order: usize) -> impl Iterator<Item = HarmonicIndex> {
        (0..mode_count(max_order)).map(HarmonicIndex::from_flat)
    }
}

/// `(N+1)²`, the number of modes of order at most `N`.
pub const fn mode_count(max_order: usize) -> usize {
    (max_order + 1) * (max_order + 1)
}

/// Fully normalised associated Legendre values `P̄_n^m(cos θ)` for
/// `0 <= m <= n <= nmax`, Condon–Shortley phase included, stored at
/// `n(n+1)/2 + m`.
fn normalized_legendre(nmax: usize, theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let at = |n: usize, m: usize| n * (n + 1) / 2 + m;
    let mut p = vec![0.0; (nmax + 1) * (nmax + 2) / 2];
    p[0] = (0.25 / PI).sqrt();
    for m in 1..=nmax {
        p[at(m, m)] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[at(m - 1, m - 1)];
    }
    for m in 0..nmax {
        p[at(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * c * p[at(m, m)];
    }
    for m in 0..=nmax {
        for n in (m + 2)..=nmax {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            p[at(n, m)] = a * (c * p[at(n - 1, m)] - b * p[at(n - 2, m)]);
        }
    }
    p
}

/// `Y_nm(θ, φ)` for every mode up to `max_order`, in flat order.
pub fn spherical_harmonics_upto(max_order: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let p = normalized_legendre(max_order, theta);
    let mut out = vec![Complex64::new(0.0, 0.0); mode_count(max_order)];
    for n in 0..=max_order {
        let base = n * n + n;
        for m in 0..=n {
            let val = p[n * (n + 1) / 2 + m] * Complex64::from_polar(1.0, m as f64 * phi);
            out[base + m] = val;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[base - m] = sign * val.conj();
            }
        }
    }
    out
}

/// Single orthonormal spherical harmonic `Y_nm(θ, φ)`.
pub fn spherical_harmonic(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<Complex64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(format!("polar angle {theta} outside [0, π]")));
    }
    Ok(spherical_harmonics_upto(idx.order(), theta, phi)[idx.flat()])
}

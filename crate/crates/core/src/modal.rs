//! Truncation rules, coefficient vectors and field evaluation.

use std::f64::consts::{E, PI};
use std::ops::{Add, Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Cartesian3, SphericalCoord};
use crate::specfun::{
    mode_count, spherical_bessel_j_seq, spherical_hankel_h1_seq, spherical_harmonics_upto, HarmonicIndex,
};

pub const DEFAULT_SOUND_SPEED: f64 = 343.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Frequency, sound speed and the derived wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    frequency: f64,
    sound_speed: f64,
    wavenumber: f64,
}

impl WaveContext {
    pub fn new(frequency: f64, sound_speed: f64) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) || !(sound_speed > 0.0 && sound_speed.is_finite()) {
            return Err(Error::domain(format!(
                "need f > 0 and c > 0, got f = {frequency}, c = {sound_speed}"
            )));
        }
        Ok(Self {
            frequency,
            sound_speed,
            wavenumber: 2.0 * PI * frequency / sound_speed,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn k(&self) -> f64 {
        self.wavenumber
    }
}

/// Modal coefficients up to `max_order`, stored in flat `n² + n + m` order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    max_order: usize,
    entries: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn zeros(max_order: usize) -> Self {
        Self {
            max_order,
            entries: vec![Complex64::new(0.0, 0.0); mode_count(max_order)],
        }
    }

    /// Unit vector selecting `idx`.
    pub fn unit(max_order: usize, idx: HarmonicIndex) -> Result<Self> {
        if idx.order() > max_order {
            return Err(Error::domain(format!(
                "mode order {} exceeds vector order {max_order}",
                idx.order()
            )));
        }
        let mut v = Self::zeros(max_order);
        v.entries[idx.flat()] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_entries(max_order: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != mode_count(max_order) {
            return Err(Error::config(
                "coefficient length",
                format!("expected {} entries for order {max_order}, got {}", mode_count(max_order), entries.len()),
            ));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numerical {
                context: "coefficient vector".into(),
                detail: "non-finite entry".into(),
            });
        }
        Ok(Self { max_order, entries })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn get(&self, idx: HarmonicIndex) -> Complex64 {
        self.entries.get(idx.flat()).copied().unwrap_or_default()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<usize> for CoefficientVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for CoefficientVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

/// Sum of vectors of possibly different order; the result has the larger order.
impl Add for &CoefficientVector {
    type Output = CoefficientVector;
    fn add(self, rhs: &CoefficientVector) -> CoefficientVector {
        let (big, small) = if self.max_order >= rhs.max_order { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (o, s) in out.entries.iter_mut().zip(&small.entries) {
            *o += s;
        }
        out
    }
}

impl Mul<Complex64> for &CoefficientVector {
    type Output = CoefficientVector;
    fn mul(self, s: Complex64) -> CoefficientVector {
        CoefficientVector {
            max_order: self.max_order,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }
}

/// `⌈k·e·R/2⌉`.
pub fn truncation_order(k: f64, radius: f64) -> usize {
    (k * E * radius / 2.0).ceil().max(0.0) as usize
}

/// `⌊π·f·e·r/c⌋`, the highest order excited on a sphere of radius `r`.
pub fn active_order(frequency: f64, radius: f64, sound_speed: f64) -> usize {
    (PI * frequency * E * radius / sound_speed).floor().max(0.0) as usize
}

/// `β_nm = i·k·j_n(k·|y|)·Y*_nm(ŷ)` for `n ≤ max_order`.
pub fn point_source_outgoing_coeffs(y: SphericalCoord, ctx: &WaveContext, max_order: usize) -> CoefficientVector {
    let k = ctx.k();
    let j = spherical_bessel_j_seq(max_order, k * y.radius);
    let ylm = spherical_harmonics_upto(max_order, y.theta, y.phi);
    let entries = HarmonicIndex::up_to(max_order)
        .map(|idx| I * k * j[idx.order()] * ylm[idx.flat()].conj())
        .collect();
    CoefficientVector { max_order, entries }
}

/// `Σ α_vμ j_v(k|x|) Y_vμ(x̂)`.
pub fn eval_interior_field(coeffs: &CoefficientVector, x: SphericalCoord, ctx: &WaveContext) -> Complex64 {
    let n = coeffs.max_order();
    let j = spherical_bessel_j_seq(n, ctx.k() * x.radius);
    let ylm = spherical_harmonics_upto(n, x.theta, x.phi);
    HarmonicIndex::up_to(n)
        .map(|idx| coeffs[idx.flat()] * j[idx.order()] * ylm[idx.flat()])
        .sum()
}

/// `Σ β_nm h_n(k|z|) Y_nm(ẑ)`.
pub fn eval_exterior_field(coeffs: &CoefficientVector, z: SphericalCoord, ctx: &WaveContext) -> Result<Complex64> {
    let n = coeffs.max_order();
    let h = spherical_hankel_h1_seq(n, ctx.k() * z.radius)?;
    let ylm = spherical_harmonics_upto(n, z.theta, z.phi);
    Ok(HarmonicIndex::up_to(n)
        .map(|idx| coeffs[idx.flat()] * h[idx.order()] * ylm[idx.flat()])
        .sum())
}

/// Free-space Green's function `G(d) = e^{ikd}/(4πd)`.
pub fn green(distance: f64, k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (4.0 * PI * distance), k * distance)
}

/// Direct-path pressure at `x` from a unit point source at `y`.
pub fn direct_field(x: Cartesian3, y: Cartesian3, ctx: &WaveContext) -> Result<Complex64> {
    let d = x.distance(y);
    if d == 0.0 {
        return Err(Error::domain("direct field requested at the source position"));
    }
    Ok(green(d, ctx.k()))
}

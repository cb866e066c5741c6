//! Coordinates, region bookkeeping and array layouts.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cartesian3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Cartesian3 {
    pub const ZERO: Cartesian3 = Cartesian3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(self, other: Cartesian3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_spherical(self) -> SphericalCoord {
        to_spherical(self)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Cartesian3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl Add for Cartesian3 {
    type Output = Cartesian3;
    fn add(self, o: Cartesian3) -> Cartesian3 {
        Cartesian3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Cartesian3 {
    type Output = Cartesian3;
    fn sub(self, o: Cartesian3) -> Cartesian3 {
        Cartesian3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Cartesian3 {
    type Output = Cartesian3;
    fn neg(self) -> Cartesian3 {
        Cartesian3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Cartesian3 {
    type Output = Cartesian3;
    fn mul(self, s: f64) -> Cartesian3 {
        Cartesian3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// `(radius, polar angle θ ∈ [0, π], azimuth φ ∈ [0, 2π))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SphericalCoord {
    pub radius: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalCoord {
    pub const fn new(radius: f64, theta: f64, phi: f64) -> Self {
        Self { radius, theta, phi }
    }

    pub fn to_cartesian(self) -> Cartesian3 {
        to_cartesian(self)
    }
}

/// The zero vector maps to `(0, 0, 0)`.
pub fn to_spherical(v: Cartesian3) -> SphericalCoord {
    let radius = v.norm();
    if radius == 0.0 {
        return SphericalCoord::default();
    }
    let theta = (v.z / radius).clamp(-1.0, 1.0).acos();
    let mut phi = v.y.atan2(v.x);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi = 0.0;
    }
    SphericalCoord { radius, theta, phi }
}

pub fn to_cartesian(s: SphericalCoord) -> Cartesian3 {
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.phi.sin_cos();
    Cartesian3::new(s.radius * st * cp, s.radius * st * sp, s.radius * ct)
}

/// Receiver sphere about the origin `O` and source sphere (or shell) about
/// `O_s = O + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPair {
    pub receiver_radius: f64,
    pub source_radius: f64,
    pub source_inner_radius: f64,
    pub offset: Cartesian3,
}

impl RegionPair {
    pub fn new(
        receiver_radius: f64,
        source_radius: f64,
        source_inner_radius: f64,
        offset: Cartesian3,
    ) -> Result<Self> {
        let r = Self {
            receiver_radius,
            source_radius,
            source_inner_radius,
            offset,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.receiver_radius > 0.0) {
            return Err(Error::config(
                "region radii",
                format!("receiver radius must be positive, got {}", self.receiver_radius),
            ));
        }
        if !(0.0 <= self.source_inner_radius && self.source_inner_radius < self.source_radius) {
            return Err(Error::config(
                "region radii",
                format!(
                    "need 0 <= inner source radius ({}) < source radius ({})",
                    self.source_inner_radius, self.source_radius
                ),
            ));
        }
        if !self.offset.is_finite() {
            return Err(Error::config("region radii", "non-finite source offset"));
        }
        Ok(())
    }

    /// Regions overlap when the center distance is below the radius sum.
    pub fn overlapping(&self) -> bool {
        self.offset.norm() < self.receiver_radius + self.source_radius
    }
}

/// Golden-angle spiral with one point per equal-area latitude band; the
/// `i`-th point sits at `z = 1 − (2i+1)/count`.
pub fn equal_area_directions(count: usize) -> Vec<(f64, f64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let theta = z.clamp(-1.0, 1.0).acos();
            let phi = (i as f64 * golden).rem_euclid(2.0 * PI);
            (theta, phi)
        })
        .collect()
}

/// Spherical-shell array: equal-area directions, radii i.i.d. uniform on
/// `[inner, outer]` drawn from a ChaCha8 stream seeded with `seed`.
pub fn shell_array(count: usize, outer: f64, inner: f64, seed: u64) -> Result<Vec<SphericalCoord>> {
    if count == 0 {
        return Err(Error::config("array size", "shell array needs at least one element"));
    }
    if !(0.0 <= inner && inner <= outer && outer > 0.0) {
        return Err(Error::config(
            "shell radii",
            format!("need 0 <= inner ({inner}) <= outer ({outer}), outer > 0"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = outer - inner;
    Ok(equal_area_directions(count)
        .into_iter()
        .map(|(theta, phi)| {
            let u: f64 = rng.gen();
            let radius = if width == 0.0 { outer } else { inner + width * u };
            SphericalCoord::new(radius, theta, phi)
        })
        .collect())
}

/// Equal-area directions at a fixed radius.
pub fn sphere_array(count: usize, radius: f64) -> Result<Vec<SphericalCoord>> {
    if count == 0 || !(radius > 0.0) {
        return Err(Error::config(
            "array size",
            format!("sphere array needs count >= 1 and radius > 0 (got {count}, {radius})"),
        ));
    }
    Ok(equal_area_directions(count)
        .into_iter()
        .map(|(theta, phi)| SphericalCoord::new(radius, theta, phi))
        .collect())
}

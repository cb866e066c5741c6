//! Shoebox image-source model used as ground truth.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Cartesian3;
use crate::modal::{green, WaveContext};

/// Rectangular room. Positions handed to this module are relative to the
/// analysis origin, which sits at `origin_offset` measured from the
/// `(0, 0, 0)` corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomModel {
    pub dimensions: [f64; 3],
    /// Wall reflection coefficients ordered `x−, x+, y−, y+, z−, z+`.
    pub wall_reflection: [f64; 6],
    pub max_image_order: usize,
    pub origin_offset: Cartesian3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource {
    pub position: Cartesian3,
    pub amplitude: f64,
    pub order: usize,
}

impl RoomModel {
    /// Room with the analysis origin at its center.
    pub fn new(dimensions: [f64; 3], wall_reflection: [f64; 6], max_image_order: usize) -> Result<Self> {
        let origin_offset = Cartesian3::new(dimensions[0] / 2.0, dimensions[1] / 2.0, dimensions[2] / 2.0);
        Self::with_origin(dimensions, wall_reflection, max_image_order, origin_offset)
    }

    pub fn with_origin(
        dimensions: [f64; 3],
        wall_reflection: [f64; 6],
        max_image_order: usize,
        origin_offset: Cartesian3,
    ) -> Result<Self> {
        let room = Self {
            dimensions,
            wall_reflection,
            max_image_order,
            origin_offset,
        };
        room.validate()?;
        Ok(room)
    }

    /// 6 × 5 × 2.5 m, reflections `[0.9, 0.9, 0.9, 0.9, 0.7, 0.7]`, images up to order 2.
    pub fn reference_room() -> Self {
        Self::new([6.0, 5.0, 2.5], [0.9, 0.9, 0.9, 0.9, 0.7, 0.7], 2).expect("preset is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::config("room dimensions", format!("{:?} must be positive", self.dimensions)));
        }
        if self.wall_reflection.iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return Err(Error::config(
                "wall reflection",
                format!("{:?} must lie in [0, 1]", self.wall_reflection),
            ));
        }
        let o = self.origin_offset.to_array();
        if (0..3).any(|d| !(o[d] > 0.0 && o[d] < self.dimensions[d])) {
            return Err(Error::config(
                "room containment",
                format!("origin offset {o:?} is not strictly inside the room"),
            ));
        }
        Ok(())
    }

    /// Same geometry with every wall fully absorbing.
    pub fn anechoic(&self) -> Self {
        Self {
            wall_reflection: [0.0; 6],
            ..self.clone()
        }
    }

    fn to_corner(&self, p: Cartesian3) -> [f64; 3] {
        (p + self.origin_offset).to_array()
    }

    pub fn contains(&self, p: Cartesian3) -> bool {
        let c = self.to_corner(p);
        (0..3).all(|d| c[d] > 0.0 && c[d] < self.dimensions[d])
    }

    fn check_inside(&self, p: Cartesian3, what: &str) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} ({}, {}, {}) lies outside the room",
                p.x, p.y, p.z
            )))
        }
    }
}

/// The true source and its mirror images up to `max_order` reflections,
/// ordered by reflection count and then by position.
///
/// Each axis contributes images at `(1 − 2p)·y + 2m·L` in corner coordinates
/// (`p ∈ {0, 1}`, `m ∈ ℤ`), hitting the low wall `|m − p|` times and the high
/// wall `|m|` times.
pub fn enumerate_images(room: &RoomModel, y: Cartesian3, max_order: usize) -> Result<Vec<ImageSource>> {
    room.check_inside(y, "source")?;
    let yc = room.to_corner(y);
    let span = max_order as i64;

    // Per-axis candidates: (coordinate, reflections, amplitude).
    let axis = |d: usize| {
        let mut out = Vec::new();
        for p in 0..=1i64 {
            for m in -span..=span {
                let lo = (m - p).unsigned_abs() as usize;
                let hi = m.unsigned_abs() as usize;
                if lo + hi > max_order {
                    continue;
                }
                let coord = (1 - 2 * p) as f64 * yc[d] + 2.0 * m as f64 * room.dimensions[d];
                let amp = room.wall_reflection[2 * d].powi(lo as i32) * room.wall_reflection[2 * d + 1].powi(hi as i32);
                out.push((coord - room.origin_offset.to_array()[d], lo + hi, amp));
            }
        }
        out
    };
    let (ax, ay, az) = (axis(0), axis(1), axis(2));

    let mut images = Vec::new();
    for &(x, ox, bx) in &ax {
        for &(yv, oy, by) in &ay {
            if ox + oy > max_order {
                continue;
            }
            for &(z, oz, bz) in &az {
                let order = ox + oy + oz;
                if order <= max_order {
                    images.push(ImageSource {
                        position: Cartesian3::new(x, yv, z),
                        amplitude: bx * by * bz,
                        order,
                    });
                }
            }
        }
    }
    images.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.position.x.total_cmp(&b.position.x))
            .then(a.position.y.total_cmp(&b.position.y))
            .then(a.position.z.total_cmp(&b.position.z))
    });
    Ok(images)
}

/// Pressure at `x` from a precomputed image set.
pub fn image_field(images: &[ImageSource], x: Cartesian3, ctx: &WaveContext) -> Result<Complex64> {
    let k = ctx.k();
    let mut sum = Complex64::new(0.0, 0.0);
    for img in images {
        if img.amplitude == 0.0 && img.order > 0 {
            continue;
        }
        let d = x.distance(img.position);
        if d == 0.0 {
            return Err(Error::domain("receiver coincides with a source or image"));
        }
        sum += img.amplitude * green(d, k);
    }
    Ok(sum)
}

/// RTF between `y` (source) and `x` (receiver), direct path included.
pub fn rtf_oracle(room: &RoomModel, x: Cartesian3, y: Cartesian3, ctx: &WaveContext) -> Result<Complex64> {
    room.check_inside(x, "receiver")?;
    if x == y {
        return Err(Error::domain("receiver and source coincide"));
    }
    let images = enumerate_images(room, y, room.max_image_order)?;
    image_field(&images, x, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::direct_field;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn ctx() -> WaveContext {
        WaveContext::new(900.0, 343.0).unwrap()
    }

    fn random_inside(rng: &mut ChaCha8Rng, room: &RoomModel) -> Cartesian3 {
        let d = room.dimensions;
        Cartesian3::new(
            rng.gen_range(0.05..d[0] - 0.05),
            rng.gen_range(0.05..d[1] - 0.05),
            rng.gen_range(0.05..d[2] - 0.05),
        ) - room.origin_offset
    }

    /// Distinct image positions reachable by exactly `n` mirror operations,
    /// found by breadth-first reflection of point sets.
    fn brute_force_counts(room: &RoomModel, y: Cartesian3, nmax: usize) -> Vec<usize> {
        let key = |p: [f64; 3]| p.map(|v| (v * 1e6).round() as i64);
        let mirror = |p: [f64; 3], wall: usize| {
            let d = wall / 2;
            let plane = if wall.is_multiple_of(2) { 0.0 } else { room.dimensions[d] };
            let mut q = p;
            q[d] = 2.0 * plane - p[d];
            q
        };
        let start = room.to_corner(y);
        let mut seen = HashSet::from([key(start)]);
        let mut frontier = vec![start];
        let mut counts = vec![1];
        for _ in 1..=nmax {
            let mut next = Vec::new();
            for p in &frontier {
                for wall in 0..6 {
                    let q = mirror(*p, wall);
                    if seen.insert(key(q)) {
                        next.push(q);
                    }
                }
            }
            counts.push(next.len());
            frontier = next;
        }
        counts
    }

    #[test]
    fn image_counts() {
        let room = RoomModel::reference_room();
        let y = Cartesian3::new(1.1, 0.9, 0.4);
        assert_eq!(enumerate_images(&room, y, 0).unwrap().len(), 1);
        assert_eq!(enumerate_images(&room, y, 1).unwrap().len(), 7);
        assert_eq!(enumerate_images(&room, y, 2).unwrap().len(), 25);
        let brute = brute_force_counts(&room, y, 4);
        let imgs = enumerate_images(&room, y, 4).unwrap();
        for (n, &want) in brute.iter().enumerate() {
            assert_eq!(imgs.iter().filter(|i| i.order == n).count(), want, "order {n}");
        }
    }

    #[test]
    fn first_order_x_minus_image() {
        let room = RoomModel::reference_room();
        let y = Cartesian3::new(1.0, 1.0, 0.5);
        let imgs = enumerate_images(&room, y, 1).unwrap();
        assert_eq!(imgs[0].order, 0);
        assert_eq!(imgs[0].amplitude, 1.0);
        assert_eq!(imgs[0].position, y);
        // corner x = 4.0 mirrors to −4.0, i.e. −7.0 about the center
        let xm = imgs
            .iter()
            .find(|i| i.order == 1 && (i.position.x + 7.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(xm.amplitude, 0.9);
        assert_eq!((xm.position.y, xm.position.z), (1.0, 0.5));
        let zp = imgs
            .iter()
            .find(|i| i.order == 1 && (i.position.z - 2.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(zp.amplitude, 0.7);
    }

    #[test]
    fn second_order_amplitudes() {
        let room = RoomModel::reference_room();
        let imgs = enumerate_images(&room, Cartesian3::new(0.2, -0.3, 0.1), 2).unwrap();
        let mut amps: Vec<f64> = imgs.iter().filter(|i| i.order == 2).map(|i| i.amplitude).collect();
        amps.sort_by(f64::total_cmp);
        // pairs among {0.9 ×4 walls, 0.7 ×2 walls} with opposite-wall revisits
        let n49 = amps.iter().filter(|&&a| (a - 0.49).abs() < 1e-12).count();
        let n63 = amps.iter().filter(|&&a| (a - 0.63).abs() < 1e-12).count();
        let n81 = amps.iter().filter(|&&a| (a - 0.81).abs() < 1e-12).count();
        assert_eq!(n49 + n63 + n81, 18);
        assert_eq!(n49, 2);
        assert_eq!(n63, 8);
        assert_eq!(n81, 8);
    }

    #[test]
    fn ordering_is_deterministic() {
        let room = RoomModel::reference_room();
        let imgs = enumerate_images(&room, Cartesian3::new(0.3, 0.3, 0.3), 3).unwrap();
        for w in imgs.windows(2) {
            assert!(w[0].order <= w[1].order);
            if w[0].order == w[1].order {
                assert!(w[0].position.x <= w[1].position.x);
            }
        }
    }

    #[test]
    fn free_field_cases() {
        let room = RoomModel::reference_room();
        let (x, y) = (Cartesian3::new(0.1, 0.2, 0.0), Cartesian3::new(1.0, 1.0, 0.5));
        let direct = direct_field(x, y, &ctx()).unwrap();
        assert_eq!(rtf_oracle(&room.anechoic(), x, y, &ctx()).unwrap(), direct);
        let mut zero_order = room.clone();
        zero_order.max_image_order = 0;
        assert_eq!(rtf_oracle(&zero_order, x, y, &ctx()).unwrap(), direct);
    }

    #[test]
    fn reciprocity() {
        let room = RoomModel::new([6.0, 5.0, 2.5], [0.8; 6], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = random_inside(&mut rng, &room);
            let y = random_inside(&mut rng, &room);
            let a = rtf_oracle(&room, x, y, &ctx()).unwrap();
            let b = rtf_oracle(&room, y, x, &ctx()).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn first_order_linear_in_reflection() {
        let mut room = RoomModel::reference_room();
        room.max_image_order = 1;
        let scaled = RoomModel {
            wall_reflection: room.wall_reflection.map(|b| 0.5 * b),
            ..room.clone()
        };
        let (x, y) = (Cartesian3::new(-0.4, 0.3, 0.2), Cartesian3::new(1.2, 0.8, 0.6));
        let d = direct_field(x, y, &ctx()).unwrap();
        let a = rtf_oracle(&room, x, y, &ctx()).unwrap() - d;
        let b = rtf_oracle(&scaled, x, y, &ctx()).unwrap() - d;
        assert_relative_eq!((b - 0.5 * a).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn magnitude_bound() {
        let room = RoomModel::reference_room();
        let (x, y) = (Cartesian3::new(0.0, 0.0, 0.0), Cartesian3::new(1.0, 1.0, 0.5));
        let imgs = enumerate_images(&room, y, 2).unwrap();
        let bound: f64 = imgs
            .iter()
            .map(|i| i.amplitude / (4.0 * std::f64::consts::PI * x.distance(i.position)))
            .sum();
        assert!(rtf_oracle(&room, x, y, &ctx()).unwrap().norm() <= bound);
    }

    #[test]
    fn errors() {
        let room = RoomModel::reference_room();
        let p = Cartesian3::new(0.1, 0.1, 0.1);
        assert!(matches!(rtf_oracle(&room, p, p, &ctx()), Err(Error::Domain(_))));
        assert!(enumerate_images(&room, Cartesian3::new(3.5, 0.0, 0.0), 1).is_err());
        assert!(rtf_oracle(&room, Cartesian3::new(0.0, 0.0, 1.3), p, &ctx()).is_err());
        assert!(RoomModel::new([6.0, 5.0, 2.5], [1.1, 0.9, 0.9, 0.9, 0.7, 0.7], 2).is_err());
        assert!(RoomModel::with_origin([6.0, 5.0, 2.5], [0.9; 6], 2, Cartesian3::new(7.0, 1.0, 1.0)).is_err());
    }
}

//! The RTF parameterization: coefficient tensors per frequency,
//! reconstruction at point pairs and the relative error metric.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{to_spherical, Cartesian3, RegionPair, SphericalCoord};
use crate::linalg::{CMatrix, CVector};
use crate::modal::{direct_field, WaveContext};
use crate::room::{rtf_oracle, RoomModel};
use crate::specfun::{mode_count, spherical_bessel_j_seq, spherical_harmonics_upto, HarmonicIndex};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on region radii when checking query points.
const RADIUS_SLACK: f64 = 1e-9;

/// `α^{nm}_{vμ}` at one frequency: rows `(n,m)`, columns `(v,μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBlock {
    pub frequency: f64,
    pub source_order: usize,
    pub receiver_order: usize,
    pub alpha: CMatrix,
}

impl FrequencyBlock {
    pub fn new(frequency: f64, source_order: usize, receiver_order: usize, alpha: CMatrix) -> Result<Self> {
        if alpha.shape() != (mode_count(source_order), mode_count(receiver_order)) {
            return Err(Error::Format(format!(
                "alpha block {:?} does not match orders ({source_order}, {receiver_order})",
                alpha.shape()
            )));
        }
        if alpha.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numerical {
                context: format!("alpha at {frequency} Hz"),
                detail: "non-finite coefficient".into(),
            });
        }
        Ok(Self {
            frequency,
            source_order,
            receiver_order,
            alpha,
        })
    }

    pub fn coefficient_count(&self) -> usize {
        self.alpha.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtfCoefficientSet {
    pub regions: RegionPair,
    pub sound_speed: f64,
    pub blocks: Vec<FrequencyBlock>,
    /// Hex digests of the geometry the set was extracted from.
    pub digests: Vec<String>,
}

impl RtfCoefficientSet {
    pub fn frequencies(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.frequency).collect()
    }

    pub fn block(&self, frequency: f64) -> Result<&FrequencyBlock> {
        self.blocks
            .iter()
            .find(|b| (b.frequency - frequency).abs() <= 1e-9 * frequency.abs().max(1.0))
            .ok_or_else(|| Error::domain(format!("{frequency} Hz is not on the coefficient grid")))
    }

    pub fn context(&self, frequency: f64) -> Result<WaveContext> {
        WaveContext::new(frequency, self.sound_speed)
    }

    /// Copy with every block cut down to receiver order `min(N_r, order)`.
    pub fn truncated_receiver(&self, order: usize) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let nr = b.receiver_order.min(order);
                FrequencyBlock {
                    alpha: b.alpha.columns(0, mode_count(nr)).into_owned(),
                    receiver_order: nr,
                    ..b.clone()
                }
            })
            .collect();
        Self {
            blocks,
            ..self.clone()
        }
    }

    fn check_points(&self, x: SphericalCoord, y_s: SphericalCoord) -> Result<()> {
        if x.radius > self.regions.receiver_radius * (1.0 + RADIUS_SLACK) {
            return Err(Error::domain(format!(
                "receiver point radius {} exceeds R_r = {}",
                x.radius, self.regions.receiver_radius
            )));
        }
        if y_s.radius > self.regions.source_radius * (1.0 + RADIUS_SLACK) {
            return Err(Error::domain(format!(
                "source point radius {} exceeds R_s = {}",
                y_s.radius, self.regions.source_radius
            )));
        }
        Ok(())
    }
}

/// `i·k·Σ α^{nm}_{vμ}·j_n(k|y|)·Y*_nm(ŷ)·j_v(k|x|)·Y_vμ(x̂)`.
pub fn reconstruct_reverberant(set: &RtfCoefficientSet, x: SphericalCoord, y_s: SphericalCoord, frequency: f64) -> Result<Complex64> {
    set.check_points(x, y_s)?;
    let block = set.block(frequency)?;
    let k = set.context(frequency)?.k();
    let (ns, nr) = (block.source_order, block.receiver_order);

    let js = spherical_bessel_j_seq(ns, k * y_s.radius);
    let ys = spherical_harmonics_upto(ns, y_s.theta, y_s.phi);
    let bs = CVector::from_iterator(
        mode_count(ns),
        HarmonicIndex::up_to(ns).map(|i| js[i.order()] * ys[i.flat()].conj()),
    );
    let jx = spherical_bessel_j_seq(nr, k * x.radius);
    let yx = spherical_harmonics_upto(nr, x.theta, x.phi);
    let bx = CVector::from_iterator(
        mode_count(nr),
        HarmonicIndex::up_to(nr).map(|i| jx[i.order()] * yx[i.flat()]),
    );
    Ok(I * k * (bs.transpose() * &block.alpha * bx)[(0, 0)])
}

/// Direct path plus reverberant reconstruction. `x` is about the receiver
/// origin and `y_s` about the source origin.
pub fn reconstruct_rtf(set: &RtfCoefficientSet, x: Cartesian3, y_s: Cartesian3, frequency: f64) -> Result<Complex64> {
    let y = y_s + set.regions.offset;
    let ctx = set.context(frequency)?;
    let direct = direct_field(x, y, &ctx)?;
    Ok(direct + reconstruct_reverberant(set, to_spherical(x), to_spherical(y_s), frequency)?)
}

/// `Σ|H̃ − H| / Σ|H̃|`.
pub fn relative_error(truth: &[Complex64], estimate: &[Complex64]) -> Result<f64> {
    if truth.len() != estimate.len() || truth.is_empty() {
        return Err(Error::domain(format!(
            "need equal non-empty lengths, got {} and {}",
            truth.len(),
            estimate.len()
        )));
    }
    let den: f64 = truth.iter().map(|z| z.norm()).sum();
    if den == 0.0 {
        return Err(Error::domain("relative error undefined for an all-zero truth"));
    }
    let num: f64 = truth.iter().zip(estimate).map(|(t, e)| (t - e).norm()).sum();
    Ok(num / den)
}

/// A receiver point about `O` paired with a source point about `O_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbePair {
    pub receiver: Cartesian3,
    pub source: Cartesian3,
}

/// The seven-point layout (center and `±R` along each axis) used for both
/// regions, paired first with first.
pub fn axis_probe_pairs(radius: f64) -> Vec<ProbePair> {
    let pts = [
        Cartesian3::ZERO,
        Cartesian3::new(radius, 0.0, 0.0),
        Cartesian3::new(-radius, 0.0, 0.0),
        Cartesian3::new(0.0, radius, 0.0),
        Cartesian3::new(0.0, -radius, 0.0),
        Cartesian3::new(0.0, 0.0, radius),
        Cartesian3::new(0.0, 0.0, -radius),
    ];
    pts.iter()
        .map(|&p| ProbePair {
            receiver: p,
            source: p,
        })
        .collect()
}

/// `count` pairs drawn uniformly from the receiver ball and the source ball.
pub fn random_probe_pairs(regions: &RegionPair, count: usize, seed: u64) -> Vec<ProbePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_ball = |r: f64| loop {
        let p = Cartesian3::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r), rng.gen_range(-r..=r));
        if p.norm() <= r {
            return p;
        }
    };
    (0..count)
        .map(|_| ProbePair {
            receiver: in_ball(regions.receiver_radius),
            source: in_ball(regions.source_radius),
        })
        .collect()
}

/// Radii of the probe cases in the `paper-fig5` preset.
pub const PAPER_FIG5_RADII: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// Error of the set against the image-source oracle over `probes` at one frequency.
pub fn probe_error(set: &RtfCoefficientSet, room: &RoomModel, probes: &[ProbePair], frequency: f64) -> Result<f64> {
    let ctx = set.context(frequency)?;
    let mut truth = Vec::with_capacity(probes.len());
    let mut est = Vec::with_capacity(probes.len());
    for p in probes {
        truth.push(rtf_oracle(room, p.receiver, p.source + set.regions.offset, &ctx)?);
        est.push(reconstruct_rtf(set, p.receiver, p.source, frequency)?);
    }
    relative_error(&truth, &est)
}

/// `(f, E)` over every frequency of the set.
pub fn broadband_sweep(set: &RtfCoefficientSet, room: &RoomModel, probes: &[ProbePair]) -> Result<Vec<(f64, f64)>> {
    set.blocks
        .iter()
        .map(|b| Ok((b.frequency, probe_error(set, room, probes, b.frequency)?)))
        .collect()
}

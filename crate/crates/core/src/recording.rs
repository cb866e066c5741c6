//! Higher-order microphone model: local coefficient extraction, composition
//! of unit-mode responses and direct-path removal.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sphere_array, to_spherical, Cartesian3, SphericalCoord};
use crate::linalg::{self, CMatrix, CVector, RCOND};
use crate::modal::{active_order, green, WaveContext};
use crate::room::{enumerate_images, image_field, RoomModel};
use crate::specfun::{mode_count, spherical_bessel_j_seq, spherical_hankel_h1_seq, spherical_harmonics_upto, HarmonicIndex};
use crate::synthesis::WeightMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unmasked local modes with `|j_a(kr)|` below this are rejected.
pub const BESSEL_ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoMicSpec {
    order: usize,
    local_radius: f64,
    omni_count: usize,
}

impl HoMicSpec {
    pub fn new(order: usize, local_radius: f64, omni_count: usize) -> Result<Self> {
        if omni_count < mode_count(order) {
            return Err(Error::config(
                "omni count Q' >= (A+1)^2",
                format!("Q' = {omni_count} < {} for A = {order}", mode_count(order)),
            ));
        }
        if !(local_radius > 0.0 && local_radius.is_finite()) {
            return Err(Error::config("mic radius", format!("r = {local_radius} must be positive")));
        }
        Ok(Self {
            order,
            local_radius,
            omni_count,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn local_radius(&self) -> f64 {
        self.local_radius
    }

    pub fn omni_count(&self) -> usize {
        self.omni_count
    }

    /// `min(A, ⌊π·f·e·r/c⌋)`: the local order actually observed at this frequency.
    pub fn effective_order(&self, ctx: &WaveContext) -> usize {
        self.order
            .min(active_order(ctx.frequency(), self.local_radius, ctx.sound_speed()))
    }
}

/// `A·c/(π·e·f_max)`.
pub fn mic_radius(order: usize, f_max: f64, sound_speed: f64) -> f64 {
    order as f64 * sound_speed / (PI * E * f_max)
}

/// `Q` identical higher-order units. Centers are relative to the receiver
/// origin; every unit shares the same omni offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MicArray {
    centers: Vec<Cartesian3>,
    spec: HoMicSpec,
    local_offsets: Vec<SphericalCoord>,
}

impl MicArray {
    pub fn new(centers: Vec<Cartesian3>, spec: HoMicSpec) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::config("mic count", "need at least one microphone unit"));
        }
        let local_offsets = sphere_array(spec.omni_count, spec.local_radius)?;
        Ok(Self {
            centers,
            spec,
            local_offsets,
        })
    }

    /// `count` units on equal-area directions at `ring_radius` about the origin.
    pub fn on_sphere(count: usize, ring_radius: f64, spec: HoMicSpec) -> Result<Self> {
        let centers = sphere_array(count, ring_radius)?
            .into_iter()
            .map(SphericalCoord::to_cartesian)
            .collect();
        Self::new(centers, spec)
    }

    pub fn centers(&self) -> &[Cartesian3] {
        &self.centers
    }

    pub fn spec(&self) -> &HoMicSpec {
        &self.spec
    }

    pub fn local_offsets(&self) -> &[SphericalCoord] {
        &self.local_offsets
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn omni_positions(&self, q: usize) -> impl Iterator<Item = Cartesian3> + '_ {
        let c = self.centers[q];
        self.local_offsets.iter().map(move |o| c + o.to_cartesian())
    }

    /// Smallest distance between any loudspeaker and any omni.
    pub fn min_clearance(&self, speakers: &[Cartesian3]) -> f64 {
        let mut best = f64::INFINITY;
        for q in 0..self.len() {
            for p in self.omni_positions(q) {
                for s in speakers {
                    best = best.min(p.distance(*s));
                }
            }
        }
        best
    }
}

/// How omni pressures are turned into local coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalDecoder {
    /// Least-squares fit of the harmonics to the omni pressures.
    #[default]
    LeastSquares,
    /// Equal-weight quadrature `4π/Q'·Σ p·Y*`.
    Quadrature,
}

/// How the known direct path is subtracted from the recordings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectRemoval {
    /// Pass the free-field pressures at the omnis through the same decoder.
    #[default]
    Decoded,
    /// Closed-form incident coefficients `i·k·h_a(k|R|)·Y*_ab(R̂)`.
    Analytic,
}

/// Maps the `Q'` omni pressures of one unit to its `(A+1)²` local
/// coefficients; rows above the effective order are zero.
#[derive(Debug, Clone)]
pub struct LocalDecoderMatrix {
    matrix: CMatrix,
    effective_order: usize,
}

impl LocalDecoderMatrix {
    pub fn new(mics: &MicArray, ctx: &WaveContext, kind: LocalDecoder) -> Result<Self> {
        let spec = mics.spec();
        let a_eff = spec.effective_order(ctx);
        let kr = ctx.k() * spec.local_radius;
        let j = spherical_bessel_j_seq(a_eff, kr);
        for (a, &ja) in j.iter().enumerate() {
            if ja.abs() < BESSEL_ZERO_THRESHOLD {
                return Err(Error::BesselZero {
                    order: a,
                    frequency: ctx.frequency(),
                    value: ja,
                });
            }
        }
        let modes = mode_count(a_eff);
        let offsets = mics.local_offsets();
        let mut y = CMatrix::zeros(offsets.len(), modes);
        for (p, o) in offsets.iter().enumerate() {
            let row = spherical_harmonics_upto(a_eff, o.theta, o.phi);
            for (c, v) in row.into_iter().enumerate() {
                y[(p, c)] = v;
            }
        }
        let base = match kind {
            LocalDecoder::LeastSquares => linalg::pseudo_inverse(&y, RCOND, "local decoder")?.0,
            LocalDecoder::Quadrature => y.adjoint() * Complex64::new(4.0 * PI / offsets.len() as f64, 0.0),
        };
        let mut matrix = CMatrix::zeros(mode_count(spec.order), offsets.len());
        for idx in HarmonicIndex::up_to(a_eff) {
            let scale = 1.0 / j[idx.order()];
            for p in 0..offsets.len() {
                matrix[(idx.flat(), p)] = base[(idx.flat(), p)] * scale;
            }
        }
        Ok(Self {
            matrix,
            effective_order: a_eff,
        })
    }

    pub fn effective_order(&self) -> usize {
        self.effective_order
    }

    pub fn decode(&self, pressures: &CVector) -> CVector {
        &self.matrix * pressures
    }
}

/// Per-loudspeaker local coefficients at one frequency. Rows are
/// `(q, a, b)` with `q` major; columns are loudspeakers.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTensor {
    frequency: f64,
    mic_count: usize,
    local_order: usize,
    effective_order: usize,
    data: CMatrix,
}

impl MeasurementTensor {
    pub fn from_parts(
        frequency: f64,
        mic_count: usize,
        local_order: usize,
        effective_order: usize,
        data: CMatrix,
    ) -> Result<Self> {
        if data.nrows() != mic_count * mode_count(local_order) || effective_order > local_order {
            return Err(Error::Format(format!(
                "measurement block {}x{} inconsistent with Q = {mic_count}, A = {local_order}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            frequency,
            mic_count,
            local_order,
            effective_order,
            data,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn mic_count(&self) -> usize {
        self.mic_count
    }

    pub fn speaker_count(&self) -> usize {
        self.data.ncols()
    }

    pub fn local_order(&self) -> usize {
        self.local_order
    }

    pub fn effective_order(&self) -> usize {
        self.effective_order
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    /// `γ̃_ab^(q,ℓ)`.
    pub fn get(&self, q: usize, speaker: usize, idx: HarmonicIndex) -> Complex64 {
        self.data[(q * mode_count(self.local_order) + idx.flat(), speaker)]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.data.shape() != other.data.shape() || self.local_order != other.local_order {
            return Err(Error::config("measurement shape", "tensors differ in shape"));
        }
        Ok(())
    }

    /// Entrywise difference (reverberant part when `other` is the direct part).
    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            data: &self.data - &other.data,
            ..self.clone()
        })
    }
}

fn check_clearance(speakers: &[Cartesian3], mics: &MicArray) -> Result<()> {
    let clearance = mics.min_clearance(speakers);
    if clearance < 1e-9 {
        return Err(Error::domain(format!(
            "a loudspeaker coincides with a microphone omni (clearance {clearance:e} m)"
        )));
    }
    Ok(())
}

fn tensor_from_pressures<F>(
    speakers: &[Cartesian3],
    mics: &MicArray,
    ctx: &WaveContext,
    decoder: &LocalDecoderMatrix,
    mut pressure: F,
) -> Result<MeasurementTensor>
where
    F: FnMut(usize, Cartesian3) -> Result<Complex64>,
{
    let modes = mode_count(mics.spec().order());
    let q_count = mics.len();
    let mut data = CMatrix::zeros(q_count * modes, speakers.len());
    for l in 0..speakers.len() {
        for q in 0..q_count {
            let p: Vec<Complex64> = mics
                .omni_positions(q)
                .map(|x| pressure(l, x))
                .collect::<Result<_>>()?;
            let coeffs = decoder.decode(&CVector::from_vec(p));
            data.view_mut((q * modes, l), (modes, 1)).copy_from(&coeffs);
        }
    }
    MeasurementTensor::from_parts(ctx.frequency(), q_count, mics.spec().order(), decoder.effective_order(), data)
}

/// Record oracle pressures (direct path included) at every omni for each
/// loudspeaker in turn and decode them into local coefficients.
///
/// `speakers` and `mics` share the receiver-origin frame used by `room`.
pub fn simulate_raw_measurements(
    room: &RoomModel,
    speakers: &[Cartesian3],
    mics: &MicArray,
    ctx: &WaveContext,
    decoder: LocalDecoder,
) -> Result<MeasurementTensor> {
    check_clearance(speakers, mics)?;
    for q in 0..mics.len() {
        for p in mics.omni_positions(q) {
            if !room.contains(p) {
                return Err(Error::domain(format!("omni ({}, {}, {}) lies outside the room", p.x, p.y, p.z)));
            }
        }
    }
    let images = speakers
        .iter()
        .map(|&s| enumerate_images(room, s, room.max_image_order))
        .collect::<Result<Vec<_>>>()?;
    let dec = LocalDecoderMatrix::new(mics, ctx, decoder)?;
    tensor_from_pressures(speakers, mics, ctx, &dec, |l, x| image_field(&images[l], x, ctx))
}

/// Direct-path part of each `γ̃_ab^(q,ℓ)`.
pub fn direct_tensor(
    speakers: &[Cartesian3],
    mics: &MicArray,
    ctx: &WaveContext,
    decoder: LocalDecoder,
    removal: DirectRemoval,
) -> Result<MeasurementTensor> {
    match removal {
        DirectRemoval::Decoded => {
            check_clearance(speakers, mics)?;
            let dec = LocalDecoderMatrix::new(mics, ctx, decoder)?;
            tensor_from_pressures(speakers, mics, ctx, &dec, |l, x| Ok(green(x.distance(speakers[l]), ctx.k())))
        }
        DirectRemoval::Analytic => analytic_direct_tensor(speakers, mics, ctx),
    }
}

fn analytic_direct_tensor(speakers: &[Cartesian3], mics: &MicArray, ctx: &WaveContext) -> Result<MeasurementTensor> {
    let spec = mics.spec();
    let a_eff = spec.effective_order(ctx);
    let modes = mode_count(spec.order());
    let k = ctx.k();
    let mut data = CMatrix::zeros(mics.len() * modes, speakers.len());
    for (l, s) in speakers.iter().enumerate() {
        for (q, c) in mics.centers().iter().enumerate() {
            let r = to_spherical(*s - *c);
            if r.radius == 0.0 {
                return Err(Error::domain(format!("loudspeaker {l} coincides with microphone center {q}")));
            }
            let h = spherical_hankel_h1_seq(a_eff, k * r.radius)?;
            let y = spherical_harmonics_upto(a_eff, r.theta, r.phi);
            for idx in HarmonicIndex::up_to(a_eff) {
                data[(q * modes + idx.flat(), l)] = I * k * h[idx.order()] * y[idx.flat()].conj();
            }
        }
    }
    MeasurementTensor::from_parts(ctx.frequency(), mics.len(), spec.order(), a_eff, data)
}

/// `γ_ab^(q,n,m)` for one synthesized mode, rows `(q, a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRecordings {
    mic_count: usize,
    local_order: usize,
    effective_order: usize,
    values: CVector,
}

impl ModeRecordings {
    pub fn new(mic_count: usize, local_order: usize, effective_order: usize, values: CVector) -> Result<Self> {
        if values.len() != mic_count * mode_count(local_order) {
            return Err(Error::config("recording shape", "length does not match Q·(A+1)²"));
        }
        Ok(Self {
            mic_count,
            local_order,
            effective_order,
            values,
        })
    }

    pub fn values(&self) -> &CVector {
        &self.values
    }

    pub fn mic_count(&self) -> usize {
        self.mic_count
    }

    pub fn local_order(&self) -> usize {
        self.local_order
    }

    pub fn effective_order(&self) -> usize {
        self.effective_order
    }

    pub fn get(&self, q: usize, idx: HarmonicIndex) -> Complex64 {
        self.values[q * mode_count(self.local_order) + idx.flat()]
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

fn check_weights(mt: &MeasurementTensor, len: usize) -> Result<()> {
    if len != mt.speaker_count() {
        return Err(Error::config(
            "weight vector length",
            format!("{len} weights for {} loudspeakers", mt.speaker_count()),
        ));
    }
    Ok(())
}

/// `γ^(q,n,m) = Σ_ℓ w_ℓ^{nm}·γ̃^(q,ℓ)` for an explicit weight vector.
pub fn compose_with_weights(mt: &MeasurementTensor, weights: &CVector) -> Result<ModeRecordings> {
    check_weights(mt, weights.len())?;
    ModeRecordings::new(mt.mic_count, mt.local_order, mt.effective_order, &mt.data * weights)
}

pub fn compose_mode_response(mt: &MeasurementTensor, weights: &WeightMatrix, target: HarmonicIndex) -> Result<ModeRecordings> {
    compose_with_weights(mt, &weights.column(target)?)
}

/// Every synthesized mode at once: column `(n,m)` holds `γ^(·,n,m)`.
pub fn compose_all(mt: &MeasurementTensor, weights: &WeightMatrix) -> Result<CMatrix> {
    check_weights(mt, weights.speaker_count())?;
    Ok(&mt.data * weights.matrix())
}

/// Direct part of the composed recordings for one weight vector.
pub fn direct_component(
    speakers: &[Cartesian3],
    weights: &CVector,
    mics: &MicArray,
    ctx: &WaveContext,
    decoder: LocalDecoder,
    removal: DirectRemoval,
) -> Result<ModeRecordings> {
    let dt = direct_tensor(speakers, mics, ctx, decoder, removal)?;
    compose_with_weights(&dt, weights)
}

pub fn remove_direct(total: &ModeRecordings, direct: &ModeRecordings) -> Result<ModeRecordings> {
    if total.values.len() != direct.values.len() || total.local_order != direct.local_order {
        return Err(Error::config("recording shape", "total and direct recordings differ in shape"));
    }
    Ok(ModeRecordings {
        values: &total.values - &direct.values,
        ..total.clone()
    })
}

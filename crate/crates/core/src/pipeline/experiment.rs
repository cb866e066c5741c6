//! A validated experiment: fixed geometry plus per-frequency measurement
//! and coefficient extraction.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Orders};
use crate::error::{Error, Result};
use crate::geometry::{shell_array, Cartesian3, RegionPair, SphericalCoord};
use crate::linalg::CMatrix;
use crate::recording::{direct_tensor, simulate_raw_measurements, HoMicSpec, MeasurementTensor, MicArray, BESSEL_ZERO_THRESHOLD};
use crate::room::RoomModel;
use crate::rtf::{FrequencyBlock, RtfCoefficientSet};
use crate::specfun::spherical_bessel_j_seq;
use crate::synthesis::{build_t, solve_all_weights};
use crate::translation::{build_t_prime, AlphaSolver};

/// Raw recordings for every grid frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub regions: RegionPair,
    pub sound_speed: f64,
    pub tensors: Vec<MeasurementTensor>,
    pub digests: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    room: RoomModel,
    regions: RegionPair,
    /// About the source origin.
    speakers_local: Vec<SphericalCoord>,
    /// About the receiver origin.
    speakers: Vec<Cartesian3>,
    mics: MicArray,
    frequencies: Vec<f64>,
    orders: Vec<Orders>,
}

fn hash_points<'a>(points: impl Iterator<Item = &'a Cartesian3>) -> String {
    let mut h = Sha256::new();
    for p in points {
        for v in p.to_array() {
            h.update(v.to_le_bytes());
        }
    }
    format!("{:x}", h.finalize())
}

impl Experiment {
    /// Build the geometry and check every bound the later stages would
    /// reject, before anything expensive runs.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate_static()?;
        let room = config.room_model()?;
        let regions = config.region_pair()?;
        let a = &config.arrays;

        let speakers_local = shell_array(a.speakers, regions.source_radius, regions.source_inner_radius, a.seed)?;
        let speakers: Vec<Cartesian3> = speakers_local.iter().map(|s| s.to_cartesian() + regions.offset).collect();
        if let Some(p) = speakers.iter().find(|p| !room.contains(**p)) {
            return Err(Error::config("loudspeakers inside room", format!("({}, {}, {})", p.x, p.y, p.z)));
        }

        let spec = HoMicSpec::new(a.mic_order, config.mic_local_radius(), a.omnis)?;
        let mics = MicArray::on_sphere(a.mics, config.mic_ring_radius(), spec)?;
        for q in 0..mics.len() {
            if let Some(p) = mics.omni_positions(q).find(|p| !room.contains(*p)) {
                return Err(Error::config("microphones inside room", format!("({}, {}, {})", p.x, p.y, p.z)));
            }
        }
        let clearance = mics.min_clearance(&speakers);
        if clearance < 1e-3 {
            return Err(Error::config(
                "loudspeaker/microphone clearance",
                format!("a loudspeaker lies {clearance:e} m from an omni"),
            ));
        }
        for case in config.probes.cases() {
            for p in &case.pairs {
                for x in [p.receiver, p.source + regions.offset] {
                    if !room.contains(x) {
                        return Err(Error::config("probes inside room", format!("({}, {}, {})", x.x, x.y, x.z)));
                    }
                }
            }
        }

        let frequencies = config.signal.grid()?;
        let mut orders = Vec::with_capacity(frequencies.len());
        for &f in &frequencies {
            let ctx = config.context(f)?;
            let local = spec.effective_order(&ctx);
            let kr = ctx.k() * spec.local_radius();
            for (order, &value) in spherical_bessel_j_seq(local, kr).iter().enumerate() {
                if value.abs() < BESSEL_ZERO_THRESHOLD {
                    return Err(Error::BesselZero {
                        order,
                        frequency: f,
                        value,
                    });
                }
            }
            orders.push(config.orders(f, local)?);
        }

        Ok(Self {
            config,
            room,
            regions,
            speakers_local,
            speakers,
            mics,
            frequencies,
            orders,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn room(&self) -> &RoomModel {
        &self.room
    }

    pub fn regions(&self) -> &RegionPair {
        &self.regions
    }

    pub fn speakers_local(&self) -> &[SphericalCoord] {
        &self.speakers_local
    }

    pub fn speakers(&self) -> &[Cartesian3] {
        &self.speakers
    }

    pub fn mics(&self) -> &MicArray {
        &self.mics
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn orders_at(&self, frequency: f64) -> Result<Orders> {
        self.frequencies
            .iter()
            .position(|&f| (f - frequency).abs() <= 1e-9 * frequency.abs().max(1.0))
            .map(|i| self.orders[i])
            .ok_or_else(|| Error::domain(format!("{frequency} Hz is not on the configured grid")))
    }

    /// `speakers:`, `mics:` and `config:` digests identifying the geometry
    /// and the physical settings.
    pub fn digests(&self) -> Vec<String> {
        let omnis: Vec<Cartesian3> = (0..self.mics.len()).flat_map(|q| self.mics.omni_positions(q)).collect();
        let mut physics = self.config.clone();
        physics.probes = Default::default();
        physics.output = Default::default();
        let text = serde_json::to_string(&physics).expect("config serializes");
        vec![
            format!("speakers:{}", hash_points(self.speakers.iter())),
            format!("mics:{}", hash_points(omnis.iter())),
            format!("config:{:x}", Sha256::digest(text.as_bytes())),
        ]
    }

    pub fn check_digests(&self, found: &[String]) -> Result<()> {
        let want = self.digests();
        if found != want.as_slice() {
            return Err(Error::config(
                "artifact digests",
                "artifact was produced from a different geometry or configuration",
            ));
        }
        Ok(())
    }

    pub fn measure_frequency(&self, frequency: f64) -> Result<MeasurementTensor> {
        let ctx = self.config.context(frequency)?;
        let a = &self.config.arrays;
        simulate_raw_measurements(&self.room, &self.speakers, &self.mics, &ctx, a.local_decoder)
            .map_err(|e| e.at(format!("measurement at {frequency} Hz")))
    }

    /// Recordings over the whole grid, one worker task per frequency.
    pub fn measure(&self) -> Result<MeasurementSet> {
        let tensors = self
            .frequencies
            .par_iter()
            .map(|&f| self.measure_frequency(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasurementSet {
            regions: self.regions,
            sound_speed: self.config.signal.sound_speed,
            tensors,
            digests: self.digests(),
        })
    }

    /// Weights, composition, direct removal and the receiver solve at the
    /// frequency of `mt`.
    pub fn extract_frequency(&self, mt: &MeasurementTensor) -> Result<FrequencyBlock> {
        let f = mt.frequency();
        let orders = self.orders_at(f)?;
        if mt.effective_order() != orders.local || mt.speaker_count() != self.speakers.len() || mt.mic_count() != self.mics.len() {
            return Err(Error::Format(format!("measurement at {f} Hz does not match the configured arrays")));
        }
        let a = &self.config.arrays;
        let ctx = self.config.context(f)?;
        let at = |stage: &str| format!("{stage} at {f} Hz");

        let t = build_t(&self.speakers_local, orders.source, &ctx);
        let weights = solve_all_weights(&t, a.allow_aliasing).map_err(|e| e.at(at("loudspeaker weights")))?;
        let direct = direct_tensor(&self.speakers, &self.mics, &ctx, a.local_decoder, a.direct_removal)?;
        let reverberant = mt.subtract(&direct)?;
        let gamma: CMatrix = reverberant.data() * weights.matrix();

        let tp = build_t_prime(&self.mics, orders.local, orders.receiver, &ctx, a.allow_aliasing)?;
        let solver = AlphaSolver::new(tp).map_err(|e| e.at(at("receiver solve")))?;
        let alpha = solver.solve_many(&gamma, mt.local_order())?;
        FrequencyBlock::new(f, orders.source, orders.receiver, alpha.transpose())
    }

    /// Coefficients for every recorded frequency. The recordings must carry
    /// this experiment's digests.
    pub fn extract(&self, measurements: &MeasurementSet) -> Result<RtfCoefficientSet> {
        self.check_digests(&measurements.digests)?;
        let blocks = measurements
            .tensors
            .par_iter()
            .map(|mt| self.extract_frequency(mt))
            .collect::<Result<Vec<_>>>()?;
        Ok(RtfCoefficientSet {
            regions: self.regions,
            sound_speed: self.config.signal.sound_speed,
            blocks,
            digests: self.digests(),
        })
    }

    /// Measure and extract without keeping the recordings.
    pub fn run(&self) -> Result<RtfCoefficientSet> {
        let blocks = self
            .frequencies
            .par_iter()
            .map(|&f| self.extract_frequency(&self.measure_frequency(f)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(RtfCoefficientSet {
            regions: self.regions,
            sound_speed: self.config.signal.sound_speed,
            blocks,
            digests: self.digests(),
        })
    }
}

/// Run `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("thread count", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

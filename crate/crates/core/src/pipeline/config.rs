//! Experiment configuration (TOML) and load-time validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RegionPair;
use crate::modal::{truncation_order, WaveContext, DEFAULT_SOUND_SPEED};
use crate::recording::{mic_radius, DirectRemoval, LocalDecoder};
use crate::room::RoomModel;
use crate::rtf::{axis_probe_pairs, ProbePair, PAPER_FIG5_RADII};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub room: RoomConfig,
    pub regions: RegionsConfig,
    #[serde(default)]
    pub arrays: ArraysConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub probes: ProbesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomConfig {
    pub dimensions: [f64; 3],
    /// `x−, x+, y−, y+, z−, z+`
    pub reflections: [f64; 6],
    #[serde(default = "default_image_order")]
    pub max_image_order: usize,
    /// Receiver origin measured from the room corner; defaults to the room center.
    #[serde(default)]
    pub origin: Option<[f64; 3]>,
}

fn default_image_order() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    pub source_radius: f64,
    pub source_inner_radius: f64,
    pub receiver_radius: f64,
    /// Source origin relative to the receiver origin.
    pub offset: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraysConfig {
    pub speakers: usize,
    pub seed: u64,
    pub mics: usize,
    /// Radius of the sphere carrying the microphone units; defaults to the receiver radius.
    pub mic_ring_radius: Option<f64>,
    pub mic_order: usize,
    pub omnis: usize,
    /// Omni radius of each unit; defaults to `A·c/(π·e·f_max)`.
    pub mic_radius: Option<f64>,
    pub local_decoder: LocalDecoder,
    pub direct_removal: DirectRemoval,
    /// Extra source orders constrained to zero, capped by `L`. When
    /// absent every order the loudspeakers can constrain is used.
    pub source_order_margin: Option<usize>,
    /// Extra receiver orders solved for, capped by `Q(A'+1)²`.
    pub receiver_order_margin: usize,
    /// Accept configurations that violate the aliasing bounds.
    pub allow_aliasing: bool,
}

impl Default for ArraysConfig {
    fn default() -> Self {
        Self {
            speakers: 169,
            seed: 0,
            mics: 25,
            mic_ring_radius: None,
            mic_order: 3,
            omnis: 36,
            mic_radius: None,
            local_decoder: LocalDecoder::LeastSquares,
            direct_removal: DirectRemoval::Decoded,
            source_order_margin: None,
            receiver_order_margin: 2,
            allow_aliasing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalConfig {
    pub sound_speed: f64,
    pub f_max: f64,
    /// Explicit grid; when absent the `start..=stop` range with `step` is used.
    pub frequencies: Option<Vec<f64>>,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            sound_speed: DEFAULT_SOUND_SPEED,
            f_max: 1000.0,
            frequencies: None,
            start: 200.0,
            stop: 1700.0,
            step: 25.0,
        }
    }
}

impl SignalConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(f) = &self.frequencies {
            return Ok(f.clone());
        }
        if !(self.step > 0.0) || self.stop < self.start {
            return Err(Error::config(
                "frequency grid",
                format!("need step > 0 and stop >= start, got {}..{} step {}", self.start, self.stop, self.step),
            ));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbePreset {
    PaperFig5,
}

impl std::str::FromStr for ProbePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-fig5" => Ok(ProbePreset::PaperFig5),
            other => Err(Error::config("probe preset", format!("unknown preset '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub receiver: [f64; 3],
    pub source: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbesConfig {
    pub preset: Option<ProbePreset>,
    pub pairs: Vec<PairConfig>,
}

impl Default for ProbesConfig {
    fn default() -> Self {
        Self {
            preset: Some(ProbePreset::PaperFig5),
            pairs: Vec::new(),
        }
    }
}

/// A named set of probe pairs; a sweep writes one column per case.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCase {
    pub label: String,
    pub pairs: Vec<ProbePair>,
}

impl ProbesConfig {
    pub fn cases(&self) -> Vec<ProbeCase> {
        let mut out = Vec::new();
        if let Some(ProbePreset::PaperFig5) = self.preset {
            for r in PAPER_FIG5_RADII {
                out.push(ProbeCase {
                    label: format!("E_R{r}"),
                    pairs: axis_probe_pairs(r),
                });
            }
        }
        if !self.pairs.is_empty() {
            out.push(ProbeCase {
                label: "E_custom".into(),
                pairs: self
                    .pairs
                    .iter()
                    .map(|p| ProbePair {
                        receiver: p.receiver.into(),
                        source: p.source.into(),
                    })
                    .collect(),
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Points per side of field-map grids.
    pub field_map_resolution: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            field_map_resolution: 41,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config syntax", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn room_model(&self) -> Result<RoomModel> {
        let r = &self.room;
        match r.origin {
            Some(o) => RoomModel::with_origin(r.dimensions, r.reflections, r.max_image_order, o.into()),
            None => RoomModel::new(r.dimensions, r.reflections, r.max_image_order),
        }
    }

    pub fn region_pair(&self) -> Result<RegionPair> {
        let g = &self.regions;
        RegionPair::new(g.receiver_radius, g.source_radius, g.source_inner_radius, g.offset.into())
    }

    pub fn mic_ring_radius(&self) -> f64 {
        self.arrays.mic_ring_radius.unwrap_or(self.regions.receiver_radius)
    }

    pub fn mic_local_radius(&self) -> f64 {
        self.arrays
            .mic_radius
            .unwrap_or_else(|| mic_radius(self.arrays.mic_order, self.signal.f_max, self.signal.sound_speed))
    }

    pub fn context(&self, frequency: f64) -> Result<WaveContext> {
        WaveContext::new(frequency, self.signal.sound_speed)
    }

    /// Checks that need no heavy computation: shapes, radii, probes.
    /// Geometry- and frequency-dependent bounds are checked by
    /// [`crate::pipeline::Experiment::new`].
    pub fn validate_static(&self) -> Result<()> {
        self.room_model()?;
        let regions = self.region_pair()?;
        let a = &self.arrays;
        if a.speakers == 0 || a.mics == 0 {
            return Err(Error::config("array size", "need at least one loudspeaker and one microphone"));
        }
        if !(self.signal.sound_speed > 0.0) || !(self.signal.f_max > 0.0) {
            return Err(Error::config("signal", "sound speed and f_max must be positive"));
        }
        let ring = self.mic_ring_radius();
        if !(ring >= 0.0 && ring <= regions.receiver_radius) {
            return Err(Error::config(
                "mic centers inside receiver region",
                format!("ring radius {ring} outside [0, R_r = {}]", regions.receiver_radius),
            ));
        }
        let grid = self.signal.grid()?;
        if grid.is_empty() || grid.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
            return Err(Error::config("frequency grid", "frequencies must be positive and finite"));
        }
        for case in self.probes.cases() {
            for p in &case.pairs {
                if p.receiver.norm() > regions.receiver_radius * (1.0 + 1e-9) {
                    return Err(Error::config("probe inside receiver region", format!("{:?}", p.receiver)));
                }
                if p.source.norm() > regions.source_radius * (1.0 + 1e-9) {
                    return Err(Error::config("probe inside source region", format!("{:?}", p.source)));
                }
            }
        }
        Ok(())
    }
}

/// Effective orders at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orders {
    pub source_nominal: usize,
    pub source: usize,
    pub receiver_nominal: usize,
    pub receiver: usize,
    pub local: usize,
}

/// Largest `N` with `(N+1)² <= count`.
pub fn max_order_for(count: usize) -> Option<usize> {
    let mut n = (count as f64).sqrt().floor() as usize;
    while n > 0 && n * n > count {
        n -= 1;
    }
    while (n + 1) * (n + 1) <= count {
        n += 1;
    }
    n.checked_sub(1)
}

/// `nominal + margin`, clipped to `cap` but never below `nominal`.
fn with_margin(nominal: usize, margin: usize, cap: Option<usize>) -> usize {
    let want = nominal.saturating_add(margin);
    match cap {
        Some(c) => want.min(c).max(nominal),
        None => nominal,
    }
}

impl ExperimentConfig {
    /// Truncation orders at `frequency` with margins applied, or the
    /// violated aliasing bound.
    pub fn orders(&self, frequency: f64, local: usize) -> Result<Orders> {
        let ctx = self.context(frequency)?;
        let a = &self.arrays;
        let ns0 = truncation_order(ctx.k(), self.regions.source_radius);
        let nr0 = truncation_order(ctx.k(), self.regions.receiver_radius);
        let s_cap = max_order_for(a.speakers);
        let r_rows = a.mics * (local + 1) * (local + 1);
        let r_cap = max_order_for(r_rows);
        if !a.allow_aliasing {
            if s_cap.is_none_or(|c| c < ns0) {
                return Err(Error::config(
                    "loudspeaker aliasing bound L >= (N_s+1)^2",
                    format!("L = {} < {} (N_s = {ns0}) at {frequency} Hz", a.speakers, (ns0 + 1) * (ns0 + 1)),
                ));
            }
            if r_cap.is_none_or(|c| c < nr0) {
                return Err(Error::config(
                    "microphone aliasing bound Q(A+1)^2 >= (N_r+1)^2",
                    format!(
                        "Q(A'+1)^2 = {r_rows} < {} (N_r = {nr0}, A' = {local}) at {frequency} Hz",
                        (nr0 + 1) * (nr0 + 1)
                    ),
                ));
            }
        }
        Ok(Orders {
            source_nominal: ns0,
            source: with_margin(ns0, a.source_order_margin.unwrap_or(usize::MAX), s_cap),
            receiver_nominal: nr0,
            receiver: with_margin(nr0, a.receiver_order_margin, r_cap),
            local,
        })
    }
}

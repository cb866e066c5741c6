//! Binary artifact files.
//!
//! Layout: 8-byte magic, `u32` version, `u64` header length, a JSON header,
//! then little-endian `f64` (re, im) pairs. Measurement blocks are written
//! in `(q, ℓ, a, b)` order and coefficient blocks `(n,m)`-major over
//! `(v,μ)`. The header records the SHA-256 of the payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::experiment::MeasurementSet;
use crate::error::{Error, Result};
use crate::geometry::RegionPair;
use crate::linalg::CMatrix;
use crate::recording::MeasurementTensor;
use crate::rtf::{FrequencyBlock, RtfCoefficientSet};
use crate::specfun::mode_count;

pub const MAGIC: [u8; 8] = *b"RTFMODAL";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockMeta {
    Measurement {
        mic_count: usize,
        local_order: usize,
        effective_order: usize,
        speaker_count: usize,
    },
    Coefficients {
        source_order: usize,
        receiver_order: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockHeader {
    pub frequency: f64,
    #[serde(flatten)]
    pub meta: BlockMeta,
}

impl BlockHeader {
    fn values(&self) -> usize {
        match self.meta {
            BlockMeta::Measurement {
                mic_count,
                local_order,
                speaker_count,
                ..
            } => mic_count * mode_count(local_order) * speaker_count,
            BlockMeta::Coefficients {
                source_order,
                receiver_order,
            } => mode_count(source_order) * mode_count(receiver_order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHeader {
    pub sound_speed: f64,
    pub regions: RegionPair,
    pub digests: Vec<String>,
    pub blocks: Vec<BlockHeader>,
    pub payload_sha256: String,
}

fn push(buf: &mut Vec<u8>, z: Complex64) {
    buf.extend_from_slice(&z.re.to_le_bytes());
    buf.extend_from_slice(&z.im.to_le_bytes());
}

fn write_file(w: &mut impl Write, mut header: FileHeader, payload: &[u8]) -> Result<()> {
    header.payload_sha256 = format!("{:x}", Sha256::digest(payload));
    let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

fn read_file(r: &mut impl Read) -> Result<(FileHeader, Vec<Complex64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| Error::Format("file too short".into()))?;
    if magic != MAGIC {
        return Err(Error::Format("not an RTF artifact (bad magic)".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json).map_err(|_| Error::Format("truncated header".into()))?;
    let header: FileHeader = serde_json::from_slice(&json).map_err(|e| Error::Format(format!("header: {e}")))?;

    let expected: usize = header.blocks.iter().map(BlockHeader::values).sum();
    let mut payload = Vec::with_capacity(expected * 16);
    r.read_to_end(&mut payload)?;
    if payload.len() != expected * 16 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header describes {}",
            payload.len(),
            expected * 16
        )));
    }
    if format!("{:x}", Sha256::digest(&payload)) != header.payload_sha256 {
        return Err(Error::Format("payload digest mismatch".into()));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((header, values))
}

pub fn write_measurements_to(w: &mut impl Write, set: &MeasurementSet) -> Result<()> {
    let mut payload = Vec::new();
    let mut blocks = Vec::new();
    for t in &set.tensors {
        let modes = mode_count(t.local_order());
        for q in 0..t.mic_count() {
            for l in 0..t.speaker_count() {
                for ab in 0..modes {
                    push(&mut payload, t.data()[(q * modes + ab, l)]);
                }
            }
        }
        blocks.push(BlockHeader {
            frequency: t.frequency(),
            meta: BlockMeta::Measurement {
                mic_count: t.mic_count(),
                local_order: t.local_order(),
                effective_order: t.effective_order(),
                speaker_count: t.speaker_count(),
            },
        });
    }
    let header = FileHeader {
        sound_speed: set.sound_speed,
        regions: set.regions,
        digests: set.digests.clone(),
        blocks,
        payload_sha256: String::new(),
    };
    write_file(w, header, &payload)
}

pub fn read_measurements_from(r: &mut impl Read) -> Result<MeasurementSet> {
    let (header, values) = read_file(r)?;
    let mut it = values.into_iter();
    let mut tensors = Vec::with_capacity(header.blocks.len());
    for b in &header.blocks {
        let BlockMeta::Measurement {
            mic_count,
            local_order,
            effective_order,
            speaker_count,
        } = b.meta
        else {
            return Err(Error::Format("expected a measurement file".into()));
        };
        let modes = mode_count(local_order);
        let mut data = CMatrix::zeros(mic_count * modes, speaker_count);
        for q in 0..mic_count {
            for l in 0..speaker_count {
                for ab in 0..modes {
                    data[(q * modes + ab, l)] = it.next().expect("length checked");
                }
            }
        }
        tensors.push(MeasurementTensor::from_parts(b.frequency, mic_count, local_order, effective_order, data)?);
    }
    Ok(MeasurementSet {
        regions: header.regions,
        sound_speed: header.sound_speed,
        tensors,
        digests: header.digests,
    })
}

pub fn write_coefficients_to(w: &mut impl Write, set: &RtfCoefficientSet) -> Result<()> {
    let mut payload = Vec::new();
    let mut blocks = Vec::new();
    for b in &set.blocks {
        for row in b.alpha.row_iter() {
            for &z in row.iter() {
                push(&mut payload, z);
            }
        }
        blocks.push(BlockHeader {
            frequency: b.frequency,
            meta: BlockMeta::Coefficients {
                source_order: b.source_order,
                receiver_order: b.receiver_order,
            },
        });
    }
    let header = FileHeader {
        sound_speed: set.sound_speed,
        regions: set.regions,
        digests: set.digests.clone(),
        blocks,
        payload_sha256: String::new(),
    };
    write_file(w, header, &payload)
}

pub fn read_coefficients_from(r: &mut impl Read) -> Result<RtfCoefficientSet> {
    let (header, values) = read_file(r)?;
    let mut offset = 0;
    let mut blocks = Vec::with_capacity(header.blocks.len());
    for b in &header.blocks {
        let BlockMeta::Coefficients {
            source_order,
            receiver_order,
        } = b.meta
        else {
            return Err(Error::Format("expected a coefficient file".into()));
        };
        let (rows, cols) = (mode_count(source_order), mode_count(receiver_order));
        let alpha = CMatrix::from_row_slice(rows, cols, &values[offset..offset + rows * cols]);
        offset += rows * cols;
        blocks.push(FrequencyBlock::new(b.frequency, source_order, receiver_order, alpha)?);
    }
    Ok(RtfCoefficientSet {
        regions: header.regions,
        sound_speed: header.sound_speed,
        blocks,
        digests: header.digests,
    })
}

pub fn write_measurements(path: &Path, set: &MeasurementSet) -> Result<()> {
    write_measurements_to(&mut BufWriter::new(File::create(path)?), set)
}

pub fn read_measurements(path: &Path) -> Result<MeasurementSet> {
    read_measurements_from(&mut BufReader::new(File::open(path)?))
}

pub fn write_coefficients(path: &Path, set: &RtfCoefficientSet) -> Result<()> {
    write_coefficients_to(&mut BufWriter::new(File::create(path)?), set)
}

pub fn read_coefficients(path: &Path) -> Result<RtfCoefficientSet> {
    read_coefficients_from(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Cartesian3;

    fn coeff_set() -> RtfCoefficientSet {
        let a = CMatrix::from_fn(4, 9, |r, c| Complex64::new(r as f64 + 0.1, -(c as f64) / 3.0));
        let b = CMatrix::from_fn(1, 4, |_, c| Complex64::new(1e-300, c as f64 * std::f64::consts::PI));
        RtfCoefficientSet {
            regions: RegionPair::new(0.4, 0.4, 0.3, Cartesian3::new(1.0, 1.0, 0.5)).unwrap(),
            sound_speed: 343.0,
            blocks: vec![
                FrequencyBlock::new(900.0, 1, 2, a).unwrap(),
                FrequencyBlock::new(925.0, 0, 1, b).unwrap(),
            ],
            digests: vec!["speakers:ab".into()],
        }
    }

    #[test]
    fn coefficients_are_bit_exact() {
        let set = coeff_set();
        let mut buf = Vec::new();
        write_coefficients_to(&mut buf, &set).unwrap();
        assert_eq!(&buf[..8], b"RTFMODAL");
        let back = read_coefficients_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn row_major_payload() {
        let set = coeff_set();
        let mut buf = Vec::new();
        write_coefficients_to(&mut buf, &set).unwrap();
        let len = u64::from_le_bytes(buf[12..20].try_into().unwrap()) as usize;
        let payload = &buf[20 + len..];
        assert_eq!(payload.len(), (36 + 4) * 16);
        // Second value is alpha(0, 1).
        let re = f64::from_le_bytes(payload[16..24].try_into().unwrap());
        let im = f64::from_le_bytes(payload[24..32].try_into().unwrap());
        assert_eq!(Complex64::new(re, im), set.blocks[0].alpha[(0, 1)]);
    }

    #[test]
    fn corruption_is_detected() {
        let mut buf = Vec::new();
        write_coefficients_to(&mut buf, &coeff_set()).unwrap();
        let mut flipped = buf.clone();
        *flipped.last_mut().unwrap() ^= 1;
        assert!(matches!(read_coefficients_from(&mut flipped.as_slice()), Err(Error::Format(_))));
        let short = &buf[..buf.len() - 16];
        assert!(matches!(read_coefficients_from(&mut &short[..]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_coefficients_from(&mut bad.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn kinds_are_not_interchangeable() {
        let mut buf = Vec::new();
        write_coefficients_to(&mut buf, &coeff_set()).unwrap();
        assert!(read_measurements_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn measurements_round_trip() {
        let data = CMatrix::from_fn(2 * 16, 3, |r, c| Complex64::new(r as f64, c as f64 - 0.5));
        let t = MeasurementTensor::from_parts(500.0, 2, 3, 2, data).unwrap();
        let set = MeasurementSet {
            regions: RegionPair::new(0.4, 0.4, 0.3, Cartesian3::new(0.3, 0.3, 0.3)).unwrap(),
            sound_speed: 340.0,
            tensors: vec![t],
            digests: vec!["a".into(), "b".into()],
        };
        let mut buf = Vec::new();
        write_measurements_to(&mut buf, &set).unwrap();
        assert_eq!(read_measurements_from(&mut buf.as_slice()).unwrap(), set);
    }
}

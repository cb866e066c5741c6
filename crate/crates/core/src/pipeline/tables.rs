//! Plot-ready CSV tables.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::ProbeCase;
use super::experiment::Experiment;
use crate::error::{Error, Result};
use crate::geometry::{sphere_array, Cartesian3};
use crate::modal::truncation_order;
use crate::room::{rtf_oracle, RoomModel};
use crate::rtf::{probe_error, reconstruct_rtf, RtfCoefficientSet};
use crate::synthesis::{build_t, condition_number};

/// 17 significant digits; non-finite values as `inf`, `-inf`, `NaN`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_values(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| fmt_f64(v)).collect());
    }

    /// Parse column `name` as floats.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("no column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().map_err(|e| Error::Format(e.to_string())))
            .collect()
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        out.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(r).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// `frequency` plus one error column per probe case.
pub fn sweep_table(set: &RtfCoefficientSet, room: &RoomModel, cases: &[ProbeCase]) -> Result<Table> {
    let mut t = Table::new(std::iter::once("frequency".to_string()).chain(cases.iter().map(|c| c.label.clone())));
    let rows = set
        .blocks
        .par_iter()
        .map(|b| {
            let mut row = vec![b.frequency];
            for c in cases {
                row.push(probe_error(set, room, &c.pairs, b.frequency)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    for r in rows {
        t.push_values(&r);
    }
    Ok(t)
}

/// `κ₂(T)` at the nominal source order for the configured shell and for
/// the same number of loudspeakers on a sphere of radius `R_s`.
pub fn cond_table(exp: &Experiment) -> Result<Table> {
    let cfg = exp.config();
    let sphere = sphere_array(cfg.arrays.speakers, exp.regions().source_radius)?;
    let rows = exp
        .frequencies()
        .par_iter()
        .map(|&f| {
            let ctx = cfg.context(f)?;
            let n = truncation_order(ctx.k(), exp.regions().source_radius);
            let shell = condition_number(&build_t(exp.speakers_local(), n, &ctx))?;
            let sph = condition_number(&build_t(&sphere, n, &ctx))?;
            Ok(vec![f, shell, sph])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(["frequency", "kappa_shell", "kappa_sphere"]);
    for r in rows {
        t.push_values(&r);
    }
    Ok(t)
}

/// Loudspeakers, microphone centers and omnis in the receiver frame.
pub fn geometry_table(exp: &Experiment) -> Table {
    let mut t = Table::new(["kind", "index", "x", "y", "z"]);
    let mut add = |kind: &str, i: usize, p: Cartesian3| {
        let mut row = vec![kind.to_string(), i.to_string()];
        row.extend(p.to_array().iter().map(|&v| fmt_f64(v)));
        t.rows.push(row);
    };
    for (i, p) in exp.speakers().iter().enumerate() {
        add("speaker", i, *p);
    }
    let mics = exp.mics();
    for (i, p) in mics.centers().iter().enumerate() {
        add("mic", i, *p);
    }
    for q in 0..mics.len() {
        for (j, p) in mics.omni_positions(q).enumerate() {
            add("omni", q * mics.spec().omni_count() + j, p);
        }
    }
    t
}

/// Which point the field map moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapSweep {
    /// Receiver over a slice of the receiver region, source fixed.
    Receiver,
    /// Source over a slice of the source region, receiver fixed.
    Source,
}

/// `n×n` grid on the horizontal slice through the center of the swept
/// region; points outside the region are skipped. `fixed` is the receiver
/// position about `O` or the global source position. With `room`, oracle
/// columns are added.
pub fn field_map(
    set: &RtfCoefficientSet,
    sweep: MapSweep,
    fixed: Cartesian3,
    frequency: f64,
    n: usize,
    room: Option<&RoomModel>,
) -> Result<Table> {
    if n < 2 {
        return Err(Error::config("field map resolution", "need at least 2 points per side"));
    }
    let regions = set.regions;
    let radius = match sweep {
        MapSweep::Receiver => regions.receiver_radius,
        MapSweep::Source => regions.source_radius,
    };
    let ctx = set.context(frequency)?;
    let mut header = vec!["x", "y", "z", "re", "im"];
    if room.is_some() {
        header.extend(["re_oracle", "im_oracle", "abs_deviation"]);
    }
    let mut t = Table::new(header);
    for i in 0..n {
        for j in 0..n {
            let u = -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
            let v = -radius + 2.0 * radius * j as f64 / (n - 1) as f64;
            let local = Cartesian3::new(u, v, 0.0);
            if local.norm() > radius {
                continue;
            }
            let (x, y_s) = match sweep {
                MapSweep::Receiver => (local, fixed - regions.offset),
                MapSweep::Source => (fixed, local),
            };
            let shown = match sweep {
                MapSweep::Receiver => x,
                MapSweep::Source => y_s + regions.offset,
            };
            let h: Complex64 = reconstruct_rtf(set, x, y_s, frequency)?;
            let mut row = vec![shown.x, shown.y, shown.z, h.re, h.im];
            if let Some(room) = room {
                let o = rtf_oracle(room, x, y_s + regions.offset, &ctx)?;
                row.extend([o.re, o.im, (h - o).norm()]);
            }
            t.push_values(&row);
        }
    }
    Ok(t)
}

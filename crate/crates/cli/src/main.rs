use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rtf_core::geometry::Cartesian3;
use rtf_core::pipeline::artifacts::{read_coefficients, read_measurements, write_coefficients, write_measurements};
use rtf_core::pipeline::{
    cond_table, field_map, geometry_table, sweep_table, with_threads, Experiment, ExperimentConfig, MapSweep, ProbePreset, Table,
};
use rtf_core::room::rtf_oracle;
use rtf_core::rtf::{reconstruct_rtf, RtfCoefficientSet};
use rtf_core::{Error, Result};

const MEASUREMENTS: &str = "measurements.rtf";
const COEFFICIENTS: &str = "coefficients.rtf";

#[derive(Parser)]
#[command(name = "rtf", version, about = "Room transfer function extraction between two spherical regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Loudspeaker placement seed; overrides `arrays.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    probe_preset: Option<PresetArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    PaperFig5,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    Receiver,
    Source,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the loudspeaker-to-microphone recordings over the grid.
    Measure,
    /// Turn recordings into RTF coefficients.
    Extract {
        /// Defaults to `<out>/measurements.rtf`.
        #[arg(long)]
        measurements: Option<PathBuf>,
    },
    /// Evaluate the RTF at a point pair or over a field-map slice.
    Reconstruct {
        /// Defaults to `<out>/coefficients.rtf`.
        #[arg(long)]
        coefficients: Option<PathBuf>,
        #[arg(long)]
        frequency: f64,
        /// Receiver position about the receiver origin, `x,y,z`.
        #[arg(long, value_parser = parse_point, default_value = "0,0,0")]
        receiver: Cartesian3,
        /// Global source position, `x,y,z`; defaults to the source origin.
        #[arg(long, value_parser = parse_point)]
        source: Option<Cartesian3>,
        /// Sweep one of the points over a horizontal slice and write `field_map.csv`.
        #[arg(long, value_enum)]
        map: Option<MapArg>,
        /// Points per side of the map grid; overrides `output.field_map_resolution`.
        #[arg(long)]
        resolution: Option<usize>,
        /// Add image-source oracle values and deviations (needs --config).
        #[arg(long)]
        oracle: bool,
    },
    /// Broadband error for each probe case; writes `sweep.csv`.
    Sweep,
    /// Condition number of T for the shell and a matched sphere; writes `cond.csv`.
    Cond,
    /// Array positions; writes `geometry.csv`.
    GeometryExport,
}

fn parse_point(s: &str) -> std::result::Result<Cartesian3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        &[x, y, z] => Ok(Cartesian3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got '{s}'")),
    }
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::config("command line", "--config is required for this command"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.arrays.seed = seed;
    }
    if let Some(PresetArg::PaperFig5) = g.probe_preset {
        cfg.probes.preset = Some(ProbePreset::PaperFig5);
    }
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: Option<&ExperimentConfig>) -> Result<PathBuf> {
    let dir = g
        .out
        .clone()
        .or_else(|| cfg.map(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_table(t: &Table, path: &Path) -> Result<()> {
    t.write(path)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Coefficients from `<out>` when they match the experiment, otherwise a
/// fresh measure + extract (both artifacts are written).
fn coefficients_for(exp: &Experiment, dir: &Path) -> Result<RtfCoefficientSet> {
    let path = dir.join(COEFFICIENTS);
    if path.exists() {
        let set = read_coefficients(&path)?;
        if exp.check_digests(&set.digests).is_ok() {
            eprintln!("using {}", path.display());
            return Ok(set);
        }
        eprintln!("{} is stale, recomputing", path.display());
    }
    let m = exp.measure()?;
    write_measurements(&dir.join(MEASUREMENTS), &m)?;
    let set = exp.extract(&m)?;
    write_coefficients(&path, &set)?;
    Ok(set)
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Measure => {
            let exp = Experiment::new(load_config(g)?)?;
            let dir = out_dir(g, Some(exp.config()))?;
            let m = exp.measure()?;
            let path = dir.join(MEASUREMENTS);
            write_measurements(&path, &m)?;
            eprintln!("wrote {} ({} frequencies)", path.display(), m.tensors.len());
        }
        Command::Extract { measurements } => {
            let exp = Experiment::new(load_config(g)?)?;
            let dir = out_dir(g, Some(exp.config()))?;
            let m = read_measurements(&measurements.unwrap_or_else(|| dir.join(MEASUREMENTS)))?;
            let set = exp.extract(&m)?;
            let path = dir.join(COEFFICIENTS);
            write_coefficients(&path, &set)?;
            eprintln!("wrote {} ({} frequencies)", path.display(), set.blocks.len());
        }
        Command::Reconstruct {
            coefficients,
            frequency,
            receiver,
            source,
            map,
            resolution,
            oracle,
        } => {
            let cfg = match &g.config {
                Some(_) => Some(load_config(g)?),
                None => None,
            };
            if oracle && cfg.is_none() {
                return Err(Error::config("command line", "--oracle needs --config for the room"));
            }
            let room = cfg.as_ref().map(|c| c.room_model()).transpose()?;
            let dir = out_dir(g, cfg.as_ref())?;
            let set = read_coefficients(&coefficients.unwrap_or_else(|| dir.join(COEFFICIENTS)))?;
            let source = source.unwrap_or(set.regions.offset);
            let room = if oracle { room.as_ref() } else { None };
            match map {
                Some(m) => {
                    let n = resolution
                        .or(cfg.as_ref().map(|c| c.output.field_map_resolution))
                        .unwrap_or(41);
                    let (sweep, fixed) = match m {
                        MapArg::Receiver => (MapSweep::Receiver, source),
                        MapArg::Source => (MapSweep::Source, receiver),
                    };
                    write_table(&field_map(&set, sweep, fixed, frequency, n, room)?, &dir.join("field_map.csv"))?;
                }
                None => {
                    let h = reconstruct_rtf(&set, receiver, source - set.regions.offset, frequency)?;
                    let mut header = vec!["frequency", "re", "im"];
                    let mut row = vec![frequency, h.re, h.im];
                    if let Some(room) = room {
                        let o = rtf_oracle(room, receiver, source, &set.context(frequency)?)?;
                        header.extend(["re_oracle", "im_oracle", "abs_deviation"]);
                        row.extend([o.re, o.im, (h - o).norm()]);
                    }
                    let mut t = Table::new(header);
                    t.push_values(&row);
                    print!("{}", t.to_csv_string());
                }
            }
        }
        Command::Sweep => {
            let exp = Experiment::new(load_config(g)?)?;
            let cases = exp.config().probes.cases();
            if cases.is_empty() {
                return Err(Error::config("probes", "sweep needs a probe preset or explicit pairs"));
            }
            let dir = out_dir(g, Some(exp.config()))?;
            let set = coefficients_for(&exp, &dir)?;
            write_table(&sweep_table(&set, exp.room(), &cases)?, &dir.join("sweep.csv"))?;
        }
        Command::Cond => {
            let exp = Experiment::new(load_config(g)?)?;
            let dir = out_dir(g, Some(exp.config()))?;
            write_table(&cond_table(&exp)?, &dir.join("cond.csv"))?;
        }
        Command::GeometryExport => {
            let exp = Experiment::new(load_config(g)?)?;
            let dir = out_dir(g, Some(exp.config()))?;
            write_table(&geometry_table(&exp), &dir.join("geometry.csv"))?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Format(_) | Error::Domain(_) => 2,
        Error::Numerical { .. } | Error::BesselZero { .. } => 3,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.global.threads;
    match with_threads(threads, || run(cli)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

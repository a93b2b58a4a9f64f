//! `dimest` command-line front end.
//!
//! Exit codes: 0 success, 1 input error (bad flags, unreadable or malformed
//! files), 2 numerical error (diverged orbit, degenerate fit). Every error is
//! printed as a single `error: ...` line on stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::boxcount::{histograms_at, volume_series, CountSeries};
use crate::error::{DimError, Result};
use crate::estimation::{build_report, ReportOptions, DEFAULT_TOLERANCE, DEFAULT_UNIFORMITY_GAP};
use crate::generators::{
    cantor_points, henon_orbit, ifs_chaos_game, unit_right_triangle, uniform_segment,
    uniform_square, HenonParams, IfsSpec,
};
use crate::geometry::{AnchorMode, PointCloud, Scale, ScaleSchedule};
use crate::infodim::EntropySeries;
use crate::io::{atomic_write, format_counts, format_entropy, format_points, read_points_file};

/// Header prefix under which generated files record their provenance as JSON.
pub const PROVENANCE_PREFIX: &str = "provenance: ";

#[derive(Debug, Parser, Serialize)]
#[command(name = "dimest", version, about = "Fractal dimension estimates for point sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Write a point set as CSV.
    Generate(GenerateArgs),
    /// Occupied-box counts per scale as CSV `k,epsilon,count`.
    Count(CountArgs),
    /// Occupancy entropy per scale as CSV `k,epsilon,occupied,entropy_bits`.
    Entropy(EntropyArgs),
    /// Dimension fits and inequality checks as JSON.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Henon,
    Cantor,
    Sierpinski,
    Segment,
    Square,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    /// Hénon parameter a [default: 1.4]
    #[arg(long)]
    pub a: Option<f64>,
    /// Hénon parameter b [default: 0.3]
    #[arg(long)]
    pub b: Option<f64>,
    /// Initial x [default: 0 for henon, 0.25 for sierpinski]
    #[arg(long, allow_hyphen_values = true)]
    pub seed_x: Option<f64>,
    /// Initial y [default: 0 for henon, 0.25 for sierpinski]
    #[arg(long, allow_hyphen_values = true)]
    pub seed_y: Option<f64>,
    /// Iterates discarded before sampling [default: 1000 henon, 100 sierpinski]
    #[arg(long)]
    pub transient: Option<usize>,
    /// Points emitted [default: 1000000 henon/sierpinski, 100000 segment, 1048576 square]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Cantor construction level, 1..=20 [default: 12]
    #[arg(long)]
    pub level: Option<u32>,
    /// Chaos-game stream seed [default: 0]
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Output path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScaleArgs {
    /// Smallest k (coarsest box, epsilon = base^-k)
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub kmin: i32,
    /// Largest k (finest box)
    #[arg(long, default_value_t = 7, allow_hyphen_values = true)]
    pub kmax: i32,
    /// Scale base: 2 for dyadic, 3 for ternary boxes
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=3))]
    pub base: u32,
    /// Explicit decreasing box sizes, overriding --kmin/--kmax/--base
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Grid origin: bounding-box minimum or the coordinate origin
    #[arg(long, value_enum, default_value_t = AnchorArg::Min)]
    pub anchor: AnchorArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorArg {
    Min,
    Origin,
}

impl From<AnchorArg> for AnchorMode {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::Min => AnchorMode::Min,
            AnchorArg::Origin => AnchorMode::Origin,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Input point CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub scales: ScaleArgs,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also dump the per-cell occupancy of every scale as JSON
    #[arg(long)]
    pub histogram_json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EntropyArgs {
    /// Input point CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub scales: ScaleArgs,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Input point CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub scales: ScaleArgs,
    /// Analytically known Hausdorff dimension of the set
    #[arg(long)]
    pub reference_dim: Option<f64>,
    /// Also estimate the dimension from ε-neighborhood volumes (d <= 3)
    #[arg(long)]
    pub volume: bool,
    /// Slack in the dimension inequalities
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Largest log2(n) - S gap (bits) treated as uniform occupancy
    #[arg(long, default_value_t = DEFAULT_UNIFORMITY_GAP)]
    pub gap_threshold: f64,
    /// Output JSON path; stdout when omitted
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs one subcommand against the
/// process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            let line = line.strip_prefix("error: ").unwrap_or(line);
            let _ = writeln!(err, "error: {line}");
            return 1;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "error: {msg}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => generate(args, out),
        Command::Count(args) => count(cli, args, out),
        Command::Entropy(args) => entropy(cli, args, out),
        Command::Report(args) => report(cli, args, out),
    }
}

fn emit(path: Option<&Path>, contents: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => atomic_write(p, contents.as_bytes()),
        None => {
            out.write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn reject_flag(set: bool, flag: &str, generator: Generator) -> Result<()> {
    if set {
        return Err(DimError::InvalidParameter(format!(
            "--{flag} does not apply to the {} generator",
            format!("{generator:?}").to_lowercase()
        )));
    }
    Ok(())
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    use Generator::*;
    let g = args.generator;
    let henon_only = [("a", args.a.is_some()), ("b", args.b.is_some())];
    let seeded = [
        ("seed-x", args.seed_x.is_some()),
        ("seed-y", args.seed_y.is_some()),
        ("transient", args.transient.is_some()),
    ];
    if g != Henon {
        for (flag, set) in henon_only {
            reject_flag(set, flag, g)?;
        }
    }
    if !matches!(g, Henon | Sierpinski) {
        for (flag, set) in seeded {
            reject_flag(set, flag, g)?;
        }
    }
    reject_flag(g != Cantor && args.level.is_some(), "level", g)?;
    reject_flag(g != Sierpinski && args.rng_seed.is_some(), "rng-seed", g)?;
    reject_flag(g == Cantor && args.samples.is_some(), "samples", g)?;

    let (cloud, provenance): (PointCloud<f64>, serde_json::Value) = match g {
        Henon => {
            let defaults = HenonParams::<f64>::default();
            let params = HenonParams {
                a: args.a.unwrap_or(defaults.a),
                b: args.b.unwrap_or(defaults.b),
                seed: [args.seed_x.unwrap_or(0.0), args.seed_y.unwrap_or(0.0)],
                transient: args.transient.unwrap_or(defaults.transient),
                samples: args.samples.unwrap_or(defaults.samples),
            };
            let cloud = henon_orbit(&params)?;
            (cloud, json!({"generator": "henon", "params": params}))
        }
        Cantor => {
            let level = args.level.unwrap_or(12);
            (cantor_points(level)?, json!({"generator": "cantor", "level": level}))
        }
        Sierpinski => {
            let seed = [args.seed_x.unwrap_or(0.25), args.seed_y.unwrap_or(0.25)];
            let transient = args.transient.unwrap_or(100);
            let samples = args.samples.unwrap_or(1_000_000);
            let rng_seed = args.rng_seed.unwrap_or(0);
            let spec = IfsSpec::sierpinski(unit_right_triangle(), seed, transient, samples, rng_seed)?;
            let cloud = ifs_chaos_game(&spec)?;
            (
                cloud,
                json!({
                    "generator": "sierpinski",
                    "vertices": unit_right_triangle::<f64>(),
                    "seed": seed,
                    "transient": transient,
                    "samples": samples,
                    "rng_seed": rng_seed,
                    "rng": "chacha8",
                }),
            )
        }
        Segment => {
            let samples = args.samples.unwrap_or(100_000);
            (uniform_segment(samples)?, json!({"generator": "segment", "samples": samples}))
        }
        Square => {
            let samples = args.samples.unwrap_or(1 << 20);
            (uniform_square(samples)?, json!({"generator": "square", "samples": samples}))
        }
    };
    let header = vec![format!("{PROVENANCE_PREFIX}{provenance}")];
    emit(args.out.as_deref(), &format_points(&cloud, &header), out)
}

/// Scales requested on the command line; a single scale is allowed here and
/// rejected later by anything that fits a slope.
fn requested_scales(args: &ScaleArgs) -> Result<Vec<Scale<f64>>> {
    if let Some(eps) = &args.epsilons {
        if eps.is_empty() {
            return Err(DimError::InvalidSchedule("empty --epsilons list".into()));
        }
        if eps.len() == 1 {
            if !(eps[0].is_finite() && eps[0] > 0.0) {
                return Err(DimError::InvalidEpsilon(eps[0]));
            }
            return Ok(vec![Scale { k: 0, epsilon: eps[0] }]);
        }
        return Ok(ScaleSchedule::explicit(eps)?.scales().to_vec());
    }
    if args.kmin > args.kmax {
        return Err(DimError::InvalidSchedule(format!(
            "--kmin {} exceeds --kmax {}",
            args.kmin, args.kmax
        )));
    }
    let base = f64::from(args.base);
    Ok((args.kmin..=args.kmax).map(|k| Scale { k, epsilon: base.powi(-k) }).collect())
}

fn schedule(args: &ScaleArgs) -> Result<ScaleSchedule<f64>> {
    if let Some(eps) = &args.epsilons {
        return ScaleSchedule::explicit(eps);
    }
    match args.base {
        3 => ScaleSchedule::ternary(args.kmin, args.kmax),
        _ => ScaleSchedule::dyadic(args.kmin, args.kmax),
    }
}

struct Loaded {
    cloud: PointCloud<f64>,
    source: Option<serde_json::Value>,
}

fn load(path: &Path) -> Result<Loaded> {
    let file = read_points_file::<f64>(path)?;
    let source = file
        .header
        .iter()
        .find_map(|h| h.strip_prefix(PROVENANCE_PREFIX))
        .and_then(|s| serde_json::from_str(s).ok());
    Ok(Loaded { cloud: file.cloud, source })
}

fn count(_cli: &Cli, args: &CountArgs, out: &mut dyn Write) -> Result<()> {
    let loaded = load(&args.input)?;
    let scales = requested_scales(&args.scales)?;
    let anchor = AnchorMode::from(args.scales.anchor).resolve(&loaded.cloud)?;
    let hists = histograms_at(&loaded.cloud, &scales, &anchor, true)?;
    let series = CountSeries::from_histograms(&scales, &anchor, &hists);
    if let Some(path) = &args.histogram_json {
        let dump: Vec<_> = scales
            .iter()
            .zip(&hists)
            .map(|(s, h)| {
                let cells: Vec<_> = h
                    .sorted_cells()
                    .into_iter()
                    .map(|(idx, n)| json!({"index": idx, "count": n}))
                    .collect();
                json!({"k": s.k, "epsilon": s.epsilon, "total": h.total(), "cells": cells})
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&json!({"anchor": anchor, "scales": dump}))?;
        text.push('\n');
        atomic_write(path, text.as_bytes())?;
    }
    emit(args.out.as_deref(), &format_counts(&series), out)
}

fn entropy(_cli: &Cli, args: &EntropyArgs, out: &mut dyn Write) -> Result<()> {
    let loaded = load(&args.input)?;
    let scales = requested_scales(&args.scales)?;
    let anchor = AnchorMode::from(args.scales.anchor).resolve(&loaded.cloud)?;
    let hists = histograms_at(&loaded.cloud, &scales, &anchor, true)?;
    let series = EntropySeries::from_histograms(&scales, &anchor, &hists);
    emit(args.out.as_deref(), &format_entropy(&series), out)
}

fn report(cli: &Cli, args: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(DimError::InvalidParameter("--tolerance must be finite and >= 0".into()));
    }
    if !(args.gap_threshold.is_finite() && args.gap_threshold >= 0.0) {
        return Err(DimError::InvalidParameter("--gap-threshold must be finite and >= 0".into()));
    }
    let loaded = load(&args.input)?;
    let schedule = schedule(&args.scales)?;
    let anchor = AnchorMode::from(args.scales.anchor).resolve(&loaded.cloud)?;
    let hists = histograms_at(&loaded.cloud, schedule.scales(), &anchor, true)?;
    let counts = CountSeries::from_histograms(schedule.scales(), &anchor, &hists);
    let entropy = EntropySeries::from_histograms(schedule.scales(), &anchor, &hists);
    let volume = if args.volume {
        Some(volume_series(&loaded.cloud, &schedule)?)
    } else {
        None
    };
    let provenance = json!({
        "run": serde_json::to_value(&cli.command)?,
        "source": loaded.source,
    });
    let options = ReportOptions {
        tolerance: args.tolerance,
        uniformity_gap_threshold: args.gap_threshold,
        provenance: Some(provenance),
        ..ReportOptions::default()
    };
    let report = build_report(&counts, &entropy, volume.as_ref(), args.reference_dim, &options)?;
    emit(args.json.as_deref(), &report.to_json()?, out)
}

//! Command-line front end.
//!
//! Every subcommand is a plain function taking the parsed flags, so the
//! pipeline can be driven from tests without spawning a process. All
//! randomness derives from `--seed` through named sub-seeds (`generate`,
//! `init`, `anneal`), and every output file is written atomically.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tractmap_core::eval::{jaccard_overlap, mapped_tract, recovery_rate, OverlapReport};
use tractmap_core::optim::{
    anneal, nn_init, random_init, superset_filter, AnnealSchedule, AnnealTrace,
};
use tractmap_core::rng::sub_seed;
use tractmap_core::synth::{generate_subject_pair, BundleSpec};
use tractmap_core::{graph, Mapping, Point3, Tractography};

use crate::error::{Error, Result};
use crate::io::{self, apply_affine, AffineTransform, Format};
use crate::parallel;
use crate::report::{build_report, parse_index_file, trace_csv, MappingFile, ReportRow};

/// Iteration at which an intermediate SA result is reported.
pub const EARLY_CHECKPOINT: usize = 100;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "tractmap",
    version,
    about = "Map a tract onto another subject's tractography"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed; every stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Voxel edge lengths in mm used for overlap scores.
    #[arg(long, global = true, num_args = 3, value_names = ["X", "Y", "Z"],
          default_values_t = [2.0, 2.0, 2.0], value_parser = positive_f64)]
    pub voxel_size: Vec<f64>,
    /// Points per streamline for distance computation.
    #[arg(long, global = true, default_value_t = 20, value_parser = positive_usize)]
    pub resample: usize,
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Worker threads for distance matrices (default: available cores).
    #[arg(long, global = true, value_parser = positive_usize)]
    pub threads: Option<usize>,
}

impl Default for GlobalArgs {
    fn default() -> Self {
        GlobalArgs {
            seed: 42,
            voxel_size: vec![2.0; 3],
            resample: 20,
            output_dir: PathBuf::from("."),
            threads: None,
        }
    }
}

impl GlobalArgs {
    fn voxel(&self) -> Result<Point3> {
        point(&self.voxel_size, "--voxel-size")
    }

    fn threads(&self) -> usize {
        self.threads.unwrap_or_else(parallel::available_threads)
    }

    fn output(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a synthetic subject pair with known correspondences.
    Synth(SynthArgs),
    /// Map a source tract onto a target tractography.
    Map(MapArgs),
    /// Score a mapped tract against a reference tract.
    Eval(EvalArgs),
    /// Convert between .trk and .json.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Json,
    Trk,
}

impl From<FileFormat> for Format {
    fn from(f: FileFormat) -> Format {
        match f {
            FileFormat::Json => Format::Json,
            FileFormat::Trk => Format::Trk,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 60, value_parser = positive_usize)]
    pub bundle_size: usize,
    #[arg(long, default_value_t = 300)]
    pub distractors: usize,
    /// Per-vertex jitter, mm.
    #[arg(long, default_value_t = 1.0, value_parser = non_negative_f64)]
    pub jitter: f64,
    /// Per-streamline spread across the bundle, mm.
    #[arg(long, default_value_t = tractmap_core::synth::DEFAULT_SPREAD_SIGMA, value_parser = non_negative_f64)]
    pub spread: f64,
    /// Offset of the target bundle from the source bundle, mm.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true,
          default_values_t = [5.0, 5.0, 0.0], value_parser = finite_f64)]
    pub displacement: Vec<f64>,
    #[arg(long, value_enum, default_value_t = FileFormat::Json)]
    pub format: FileFormat,
}

impl Default for SynthArgs {
    fn default() -> Self {
        SynthArgs {
            bundle_size: 60,
            distractors: 300,
            jitter: 1.0,
            spread: tractmap_core::synth::DEFAULT_SPREAD_SIGMA,
            displacement: vec![5.0, 5.0, 0.0],
            format: FileFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    /// Nearest target streamline by MAM distance.
    Nn,
    /// Uniformly random targets.
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub source_tract: PathBuf,
    #[arg(long)]
    pub target_full: PathBuf,
    /// JSON list of indices of the homologous tract in the target; enables
    /// the superset filter.
    #[arg(long)]
    pub target_tract: Option<PathBuf>,
    /// Superset radius factor.
    #[arg(long, default_value_t = 3.0, value_parser = positive_f64)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = InitKind::Nn)]
    pub init: InitKind,
    /// 4x4 affine applied to the source before mapping (JSON or text).
    #[arg(long)]
    pub affine: Option<PathBuf>,
    /// Disable uphill moves.
    #[arg(long)]
    pub greedy_only: bool,
    /// Starting temperature (default: initial squared loss / source size).
    #[arg(long, value_parser = positive_f64)]
    pub temperature: Option<f64>,
    #[arg(long, default_value_t = 0.995, value_parser = unit_open_f64)]
    pub cooling: f64,
}

impl MapArgs {
    pub fn new(source_tract: impl Into<PathBuf>, target_full: impl Into<PathBuf>) -> Self {
        MapArgs {
            source_tract: source_tract.into(),
            target_full: target_full.into(),
            target_tract: None,
            alpha: 3.0,
            iterations: 1000,
            init: InitKind::Nn,
            affine: None,
            greedy_only: false,
            temperature: None,
            cooling: 0.995,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub tract_a: PathBuf,
    #[arg(long)]
    pub mapped_b: PathBuf,
    /// Ground-truth mapping JSON; needs --mapping.
    #[arg(long, requires = "mapping")]
    pub truth: Option<PathBuf>,
    /// Mapping JSON to score against --truth.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not finite"))
    }
}

fn finite_f64(s: &str) -> std::result::Result<f64, String> {
    parse_f64(s)
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be > 0, got {v}"))
    }
}

fn non_negative_f64(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0, got {v}"))
    }
}

fn unit_open_f64(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must be strictly between 0 and 1, got {v}"))
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be >= 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("{s:?} is not a positive integer")),
    }
}

fn point(v: &[f64], flag: &str) -> Result<Point3> {
    match v {
        [x, y, z] => Ok(Point3::new(*x, *y, *z)),
        _ => Err(Error::Input(format!(
            "{flag} takes 3 values, got {}",
            v.len()
        ))),
    }
}

fn ensure_output_dir(global: &GlobalArgs) -> Result<()> {
    std::fs::create_dir_all(&global.output_dir).map_err(|source| Error::File {
        path: global.output_dir.clone(),
        source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Runs the parsed command and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Synth(args) => cmd_synth(&cli.global, args),
        Command::Map(args) => cmd_map(&cli.global, args).map(|r| r.files),
        Command::Eval(args) => cmd_eval(&cli.global, args).map(|r| r.files),
        Command::Convert(args) => cmd_convert(args).map(|p| vec![p]),
    }
}

/// Writes `source_tract.<ext>`, `target_full.<ext>` and `ground_truth.json`.
pub fn cmd_synth(global: &GlobalArgs, args: &SynthArgs) -> Result<Vec<PathBuf>> {
    let spec = BundleSpec {
        n_streamlines: args.bundle_size,
        jitter_sigma: args.jitter,
        spread_sigma: args.spread,
        seed: sub_seed(global.seed, "generate"),
        ..Default::default()
    };
    let pair = generate_subject_pair(
        &spec,
        args.distractors,
        point(&args.displacement, "--displacement")?,
    )?;
    ensure_output_dir(global)?;
    let format = Format::from(args.format);
    let ext = format.extension();
    let source_path = global.output(&format!("source_tract.{ext}"));
    let target_path = global.output(&format!("target_full.{ext}"));
    let truth_path = global.output("ground_truth.json");
    io::write_atomic(
        &source_path,
        &io::encode_tractography(&pair.source, format)?,
    )?;
    io::write_atomic(
        &target_path,
        &io::encode_tractography(&pair.target, format)?,
    )?;
    let truth = MappingFile {
        assignment: pair.ground_truth.assignment().to_vec(),
        n_targets: pair.target.len(),
        target_tract: Some(pair.target_tract),
    };
    io::write_atomic(&truth_path, truth.to_json().as_bytes())?;
    Ok(vec![source_path, target_path, truth_path])
}

/// Result of [`cmd_map`].
#[derive(Debug, Clone)]
pub struct MapRun {
    pub files: Vec<PathBuf>,
    /// Target indices searched, ascending.
    pub superset: Vec<usize>,
    /// Initial mapping in full target indices.
    pub initial: Mapping,
    /// Best SA mapping in full target indices.
    pub mapping: Mapping,
    pub trace: AnnealTrace,
    pub initial_overlap: OverlapReport,
    pub final_overlap: OverlapReport,
}

fn to_full(q: &Mapping, superset: &[usize], n_full: usize) -> Result<Mapping> {
    let assignment = q.assignment().iter().map(|&j| superset[j]).collect();
    Ok(Mapping::new(assignment, n_full)?)
}

/// Writes `mapping.json`, `trace.csv`, `mapped_tract.<ext>`, `report.json`
/// and `report.csv`.
///
/// Distances are computed on streamlines resampled to `--resample` points;
/// overlap scores use the original vertices. The affine, when given, moves
/// the source into target space before both.
pub fn cmd_map(global: &GlobalArgs, args: &MapArgs) -> Result<MapRun> {
    let voxel = global.voxel()?;
    let threads = global.threads();
    let mut source = io::load_tractography(&args.source_tract)?;
    let target = io::load_tractography(&args.target_full)?;
    let out_format = Format::from_path(&args.target_full)?;
    if let Some(path) = &args.affine {
        let m = AffineTransform::parse(&io::read_text(path)?)?;
        source = apply_affine(&source, &m)?;
    }
    let source_res = source.resampled(global.resample)?;
    let target_res = target.resampled(global.resample)?;

    let tract_indices = match &args.target_tract {
        Some(path) => Some(parse_index_file(&io::read_text(path)?)?),
        None => None,
    };
    let superset = match &tract_indices {
        Some(idx) => superset_filter(&target_res, idx, args.alpha)?.indices,
        None => (0..target.len()).collect(),
    };
    let sub = target_res.select(&superset)?;

    let da = parallel::distance_matrix(&source_res, threads)?;
    let db = parallel::distance_matrix(&sub, threads)?;
    let q0 = match args.init {
        InitKind::Nn => nn_init(&parallel::cross_distance(&source_res, &sub, threads)?)?,
        InitKind::Random => random_init(source.len(), sub.len(), sub_seed(global.seed, "init"))?,
    };
    let sched = AnnealSchedule {
        iterations: args.iterations,
        initial_temperature: args.temperature,
        cooling: args.cooling,
        seed: sub_seed(global.seed, "anneal"),
        greedy_only: args.greedy_only,
        checkpoints: vec![EARLY_CHECKPOINT],
    };
    let trace = anneal(&da, &db, &q0, &sched)?;

    let overlap = |q: &Mapping| -> Result<(Tractography, OverlapReport)> {
        let mapped = mapped_tract(&target, q, &superset)?;
        let report = jaccard_overlap(&source, &mapped, voxel)?;
        Ok((mapped, report))
    };
    let target_tract = match &tract_indices {
        Some(idx) => Some(target.select(idx)?),
        None => None,
    };
    let mut methods: Vec<(String, &Mapping)> = vec![("init".into(), &q0)];
    for (k, snap) in &trace.snapshots {
        if *k < args.iterations {
            methods.push((format!("SA-{k}"), snap));
        }
    }
    methods.push((format!("SA-{}", args.iterations), &trace.final_mapping));

    let mut jaccard = Vec::new();
    let mut union = Vec::new();
    let mut against_tract = Vec::new();
    let mut initial_overlap = None;
    let mut final_overlap = None;
    let mut mapped_out = None;
    for (idx, (name, q)) in methods.iter().enumerate() {
        let (mapped, rep) = overlap(q)?;
        jaccard.push((format!("jaccard:{name}"), rep.jaccard));
        union.push((format!("union_jaccard:{name}"), rep.union_jaccard));
        if let Some(tb) = &target_tract {
            let r = jaccard_overlap(tb, &mapped, voxel)?;
            against_tract.push((format!("target_jaccard:{name}"), r.jaccard));
        }
        if idx == 0 {
            initial_overlap = Some(rep);
        }
        if idx == methods.len() - 1 {
            final_overlap = Some(rep);
            mapped_out = Some(mapped);
        }
    }
    let metrics = jaccard
        .into_iter()
        .chain(union)
        .chain(against_tract)
        .collect();

    let n = source.len();
    let row = ReportRow {
        source_id: stem(&args.source_tract),
        target_id: stem(&args.target_full),
        size_a: n,
        size_b: tract_indices.as_ref().map_or(target.len(), Vec::len),
        size_superset: superset.len(),
        initial_normalized_loss: trace.records[0].normalized_loss,
        final_normalized_loss: graph::normalized_loss(trace.final_loss, n)?,
        metrics,
    };
    let report = build_report(vec![row], trace.records.clone())?;

    let initial = to_full(&q0, &superset, target.len())?;
    let mapping = to_full(&trace.final_mapping, &superset, target.len())?;
    let mapping_file = MappingFile {
        assignment: mapping.assignment().to_vec(),
        n_targets: target.len(),
        target_tract: None,
    };

    ensure_output_dir(global)?;
    let files = vec![
        global.output("mapping.json"),
        global.output("trace.csv"),
        global.output(&format!("mapped_tract.{}", out_format.extension())),
        global.output("report.json"),
        global.output("report.csv"),
    ];
    let mapped = mapped_out
        .expect("at least one method")
        .with_name("mapped_tract");
    io::write_atomic(&files[0], mapping_file.to_json().as_bytes())?;
    io::write_atomic(&files[1], trace_csv(&trace.records).as_bytes())?;
    io::write_atomic(&files[2], &io::encode_tractography(&mapped, out_format)?)?;
    io::write_atomic(&files[3], report.to_json().as_bytes())?;
    io::write_atomic(&files[4], report.to_csv().as_bytes())?;

    Ok(MapRun {
        files,
        superset,
        initial,
        mapping,
        trace,
        initial_overlap: initial_overlap.expect("init is scored"),
        final_overlap: final_overlap.expect("final is scored"),
    })
}

/// Result of [`cmd_eval`].
#[derive(Debug, Clone)]
pub struct EvalRun {
    pub files: Vec<PathBuf>,
    pub overlap: OverlapReport,
    pub recovery: Option<f64>,
}

/// Writes `eval.json` with the overlap scores and, given a ground truth,
/// the recovery rate.
pub fn cmd_eval(global: &GlobalArgs, args: &EvalArgs) -> Result<EvalRun> {
    let a = io::load_tractography(&args.tract_a)?;
    let b = io::load_tractography(&args.mapped_b)?;
    let overlap = jaccard_overlap(&a, &b, global.voxel()?)?;
    let recovery = match (&args.truth, &args.mapping) {
        (Some(truth), Some(mapping)) => {
            let truth = MappingFile::parse(&io::read_text(truth)?)?.mapping()?;
            let q = MappingFile::parse(&io::read_text(mapping)?)?.mapping()?;
            Some(recovery_rate(&q, &truth)?)
        }
        (Some(_), None) => return Err(Error::Input("--truth needs --mapping".into())),
        _ => None,
    };
    let mut doc = json!({
        "tract_a": stem(&args.tract_a),
        "mapped_b": stem(&args.mapped_b),
        "jaccard": overlap.jaccard,
        "union_jaccard": overlap.union_jaccard,
        "vol_a": overlap.vol_a,
        "vol_b": overlap.vol_b,
        "vol_intersection": overlap.vol_intersection,
        "voxel_size": overlap.voxel_size.to_array(),
        "empty": overlap.empty,
    });
    if let Some(r) = recovery {
        doc["recovery_rate"] = json!(r);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("eval report serializes");
    text.push('\n');
    ensure_output_dir(global)?;
    let path = global.output("eval.json");
    io::write_atomic(&path, text.as_bytes())?;
    Ok(EvalRun {
        files: vec![path],
        overlap,
        recovery,
    })
}

/// Converts between `.trk` and `.json` by file extension.
pub fn cmd_convert(args: &ConvertArgs) -> Result<PathBuf> {
    let t = io::load_tractography(&args.input)?;
    io::save_tractography(&args.output, &t)?;
    Ok(args.output.clone())
}

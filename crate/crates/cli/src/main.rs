use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use knotscope::classify::{KnotType, DEFAULT_PROJECTIONS};
use knotscope::io;
use knotscope::pipeline::{self, CorrelateOptions, ExperimentPlan, FeatureOptions, GenOptions, PipelinePlan};
use knotscope::sampler::TrefoilPreset;
use knotscope::stats::{GroupBy, Method, Variable};
use knotscope::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Random PL knots, their Vietoris-Rips persistence and geometric observables.
/// Distances are in edge-length units.
#[derive(Parser)]
#[command(name = "knotscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample random equilateral polygons.
    Gen(GenArgs),
    /// Build parametric trefoils from presets.
    GenTrefoil(GenTrefoilArgs),
    /// Label each knot with its type.
    Classify(ClassifyArgs),
    /// Compute geometric observables.
    Measure(InOut),
    /// Compute dim-0 and dim-1 barcodes of the interpolated clouds.
    Ph(PhArgs),
    /// Compute Betti curve features from barcodes.
    Features(FeaturesArgs),
    /// Correlate features with geometry and average features per type.
    Correlate(CorrelateArgs),
    /// Run a JSON plan of stages.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct InOut {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    length: usize,
    /// Total knots to keep; with --per-type defaults to the sum of the quotas.
    #[arg(long, required_unless_present = "per_type")]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Keep only these knot types (comma separated, e.g. 0_1,3_1).
    #[arg(long = "type", value_delimiter = ',')]
    types: Vec<KnotType>,
    /// With --type, collect this many of every listed type instead of --count in total.
    #[arg(long)]
    per_type: Option<usize>,
    #[arg(long, default_value_t = GenOptions::default().max_samples)]
    max_samples: usize,
}

#[derive(Args)]
struct GenTrefoilArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    preset: Vec<TrefoilPreset>,
    #[arg(long, default_value_t = 120)]
    edges: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    io: InOut,
    #[arg(long, default_value_t = DEFAULT_PROJECTIONS)]
    projections: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PhArgs {
    #[command(flatten)]
    io: InOut,
    /// Filtration cutoff, or "auto" for the full range.
    #[arg(long, default_value = "auto")]
    t_max: String,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    barcodes: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Knots file supplying length and type columns.
    #[arg(long)]
    knots: Option<PathBuf>,
    #[arg(long)]
    filter_spike: bool,
    #[arg(long, default_value_t = FeatureOptions::default().eps_rel)]
    eps_rel: f64,
    #[arg(long, default_value_t = FeatureOptions::default().spike_width)]
    spike_width: f64,
    #[arg(long, default_value_t = FeatureOptions::default().spike_persistence)]
    spike_persistence: f64,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Where to write per-type feature averages.
    #[arg(long)]
    averages: Option<PathBuf>,
    #[arg(long, default_value = "length")]
    group_by: GroupBy,
    #[arg(long)]
    spearman: bool,
    /// Pairs as x:y (comma separated); defaults to the standard set.
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Overrides the plan's output directory.
    #[arg(long)]
    workdir: Option<PathBuf>,
    #[arg(long)]
    resume: bool,
}

fn parse_t_max(s: &str) -> Result<Option<f64>, Error> {
    if s == "auto" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 => Ok(Some(t)),
        _ => Err(Error::InvalidArgument(format!("--t-max must be positive or auto, got {s:?}"))),
    }
}

fn parse_pair(s: &str) -> Result<(Variable, Variable), Error> {
    let (x, y) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("pair {s:?} is not of the form x:y")))?;
    Ok((x.parse()?, y.parse()?))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen(a) => {
            let plan = ExperimentPlan {
                lengths: vec![a.length],
                per_length_count: a.count.unwrap_or_else(|| a.per_type.unwrap_or(0) * a.types.len()),
                per_type_count: a.per_type,
                type_filter: (!a.types.is_empty()).then_some(a.types),
                seed: a.seed,
            };
            let opts = GenOptions {
                max_samples: a.max_samples,
                ..GenOptions::default()
            };
            io::write_knots(&a.out, &pipeline::generate(&plan, &opts)?)
        }
        Command::GenTrefoil(a) => io::write_knots(&a.out, &pipeline::generate_trefoils(&a.preset, a.edges)?),
        Command::Classify(a) => {
            let knots = io::read_knots(&a.io.input)?;
            io::write_knots(&a.io.out, &pipeline::classify_all(&knots, a.projections, a.seed)?)
        }
        Command::Measure(a) => {
            let knots = io::read_knots(&a.input)?;
            io::write_geometry(&a.out, &pipeline::measure_all(&knots)?)
        }
        Command::Ph(a) => {
            let t_max = parse_t_max(&a.t_max)?;
            let knots = io::read_knots(&a.io.input)?;
            io::write_barcodes(&a.io.out, &pipeline::barcodes_all(&knots, t_max)?)
        }
        Command::Features(a) => {
            let barcodes = io::read_barcodes(&a.barcodes)?;
            let knots = a.knots.as_deref().map(io::read_knots).transpose()?;
            let opts = FeatureOptions {
                filter_spike: a.filter_spike,
                spike_width: a.spike_width,
                spike_persistence: a.spike_persistence,
                eps_rel: a.eps_rel,
            };
            io::write_features(&a.out, &pipeline::features_all(&barcodes, knots.as_deref(), &opts)?)
        }
        Command::Correlate(a) => {
            let features = io::read_features(&a.features)?;
            let geometry = io::read_geometry(&a.geometry)?;
            let mut opts = CorrelateOptions {
                group_by: a.group_by,
                method: if a.spearman { Method::Spearman } else { Method::Pearson },
                ..CorrelateOptions::default()
            };
            if !a.pairs.is_empty() {
                opts.pairs = a.pairs.iter().map(|p| parse_pair(p)).collect::<Result<_, _>>()?;
            }
            let (table, averages) = pipeline::correlate(&pipeline::join(&features, &geometry)?, &opts);
            io::write_correlations(&a.out, &table)?;
            match a.averages {
                Some(path) => io::write_averages(&path, &averages),
                None => Ok(()),
            }
        }
        Command::Pipeline(a) => {
            let plan = PipelinePlan::load(&a.plan)?;
            let dir = a
                .workdir
                .or_else(|| plan.output_dir.clone())
                .ok_or_else(|| Error::InvalidArgument("no --workdir and no output_dir in the plan".into()))?;
            let manifest = pipeline::run_plan(&plan, &dir, a.resume)?;
            log::info!("wrote {} files under {}", manifest.files.len(), dir.display());
            Ok(())
        }
    }
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("KNOTSCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("KNOTSCOPE_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                ExitCode::from(EXIT_DATA)
            } else {
                ExitCode::from(EXIT_INTERNAL)
            }
        }
    }
}

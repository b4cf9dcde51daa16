//! `annodyn` command-line interface.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "annodyn",
    version,
    about = "Contribution dynamics of annotated lyrics corpora"
)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "ANNODYN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a JSONL dump and write a binary corpus snapshot.
    Ingest(IngestArgs),
    /// Per-annotation and per-song text metrics as CSV.
    Metrics(MetricsArgs),
    /// Binned curves against time rank or user lifespan as CSV.
    Dynamics(DynamicsArgs),
    /// Fit the class utility model to a rank histogram.
    FitUtility(FitArgs),
    /// Simulate annotation arrivals from two class utilities.
    Simulate(SimulateArgs),
    /// Expert classification: bootstrap coefficients and split evaluation.
    Predict(PredictArgs),
    /// Corpus summary with headline analyses.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// JSONL input, one record per line.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TagMode {
    Occurrences,
    Unique,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated quality tag names replacing the default set.
    #[arg(long)]
    pub tags: Option<String>,
    #[arg(long, value_enum, default_value_t = TagMode::Occurrences)]
    pub tag_mode: TagMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveName {
    AnnotationIq,
    AnnotationTotalAnnotations,
    AnnotationTags,
    AnnotationLength,
    AnnotationOriginality,
    EditStrataIq,
    EditStrataTags,
    EditStrataLength,
    LifespanFirstAnnotation,
    LifespanFirstEdit,
    LifespanTags,
    LifespanLength,
    LifespanSegmentOriginality,
    LifespanSongOriginality,
}

#[derive(Args, Debug)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub curve: CurveName,
    /// Bins over [0, 1] for proportional-rank curves.
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Bootstrap replicates for per-bin standard deviations (0 disables).
    #[arg(long, default_value_t = 100)]
    pub boot: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Drop edits that directly follow an action by the same user.
    #[arg(long)]
    pub collapse_self_edits: bool,
    /// Largest edit count with its own stratum.
    #[arg(long, default_value_t = 9)]
    pub max_edits: u32,
    #[arg(long, default_value_t = 1500)]
    pub horizon_days: u32,
    #[arg(long, default_value_t = 10)]
    pub min_events: usize,
    #[arg(long, default_value_t = 10)]
    pub step_days: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ClassArg {
    High,
    Low,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub class: ClassArg,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Utility coefficients of the high class: a JSON object with b, a1, a2,
    /// c1, c2, or a fit-utility output.
    #[arg(long, required_unless_present = "reference")]
    pub params_high: Option<PathBuf>,
    #[arg(long, required_unless_present = "reference")]
    pub params_low: Option<PathBuf>,
    /// Use the built-in reference coefficients for both classes.
    #[arg(long, conflicts_with_all = ["params_high", "params_low"])]
    pub reference: bool,
    /// Annotation slots per song.
    #[arg(short = 'M', long = "slots", default_value_t = 50)]
    pub m: usize,
    /// Number of songs.
    #[arg(short = 'S', long = "songs", default_value_t = 2000)]
    pub s: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub mix_high: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mix_low: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write class-conditional coverage densities here.
    #[arg(long)]
    pub density_out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub density_bins: usize,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated predictors from a1, a2, a3, a4, e1, e2, pagerank,
    /// in_degree.
    #[arg(long, default_value = "a1,a2,a3,a4,e1,e2")]
    pub features: String,
    #[arg(long, default_value_t = 10_000)]
    pub boot: usize,
    #[arg(long, default_value_t = 1000)]
    pub splits: usize,
    #[arg(long, default_value_t = 0.75)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Skip evaluating the leading prefixes of the feature list.
    #[arg(long)]
    pub no_incremental: bool,
    /// Skip the PageRank and in-degree baselines.
    #[arg(long)]
    pub no_baselines: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help/--version.
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Dynamics(a) => commands::dynamics(&a),
        Command::FitUtility(a) => commands::fit_utility(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Report(a) => commands::report(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

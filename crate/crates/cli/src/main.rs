use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treeph::synth::SynthSpec;
use treeph_cli::{
    cmd_analyze, cmd_diagrams, cmd_dist, cmd_featurize, cmd_heatmap, cmd_synth, Covariate,
    DimSelect, DistMetric, HomDim, LengthControl, PipelineConfig, PipelineError,
};

/// Persistence-diagram pipeline for embedded trees: diagrams, features,
/// cohort statistics, and synthetic test cohorts.
#[derive(Parser)]
#[command(name = "treeph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-subject persistence diagrams from a cohort manifest.
    Diagrams(DiagramsArgs),
    /// Write the windowed feature table from computed diagrams.
    Featurize(FeaturizeArgs),
    /// Run the age or sex statistics on computed diagrams.
    Analyze(AnalyzeArgs),
    /// Sweep all feature windows (n, N) and write the statistic grid.
    Heatmap(HeatmapArgs),
    /// Distance between two diagram or point-cloud files.
    Dist(DistArgs),
    /// Generate a synthetic cohort with plantable age and sex effects.
    Synth(SynthArgs),
}

#[derive(Args)]
struct CohortIo {
    /// Cohort manifest CSV (subject_id,tree_path,age,sex).
    #[arg(long)]
    manifest: PathBuf,
    /// Directory for computed outputs.
    #[arg(long)]
    out_dir: PathBuf,
    /// Base RNG seed for every stochastic step.
    #[arg(long, env = "TREEPH_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for per-subject work (0 = automatic).
    #[arg(long, env = "TREEPH_WORKERS", default_value_t = 0)]
    workers: usize,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected FIRST:LAST, got '{s}'"))?;
    let first: usize = a.trim().parse().map_err(|_| format!("bad rank '{a}'"))?;
    let last: usize = b.trim().parse().map_err(|_| format!("bad rank '{b}'"))?;
    if first < 1 || last < first {
        return Err(format!("window needs 1 <= FIRST <= LAST, got {first}:{last}"));
    }
    Ok((first, last))
}

#[derive(Args)]
struct DiagramsArgs {
    #[command(flatten)]
    io: CohortIo,
    /// Height-filtration direction as X,Y,Z.
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = [0.0, 0.0, 1.0],
        allow_negative_numbers = true
    )]
    direction: Vec<f64>,
    /// Points per tree for the loop (dimension 1) computation.
    #[arg(long, default_value_t = 3000)]
    subsample: usize,
    /// Rips scale cap; omitted = half the subsample's bounding diagonal.
    #[arg(long)]
    max_scale: Option<f64>,
    /// Which homology dimensions to compute.
    #[arg(long, value_enum, default_value = "both")]
    dims: DimSelect,
    /// Recompute outputs that already exist.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[command(flatten)]
    io: CohortIo,
    /// Homology dimension of the diagrams to featurize.
    #[arg(long, value_enum)]
    dim: HomDim,
    /// Persistence ranks FIRST:LAST (1-indexed, inclusive).
    #[arg(long, value_parser = parse_window, default_value = "1:100")]
    window: (usize, usize),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    io: CohortIo,
    /// Covariate to test: age (correlation) or sex (permutation test).
    #[arg(long, value_enum)]
    covariate: Covariate,
    /// Homology dimension of the diagrams to analyze.
    #[arg(long, value_enum)]
    dim: HomDim,
    /// Total-length control applied to the feature vectors.
    #[arg(long, value_enum, default_value = "none")]
    control: LengthControl,
    /// Persistence ranks FIRST:LAST (1-indexed, inclusive).
    #[arg(long, value_parser = parse_window, default_value = "1:100")]
    window: (usize, usize),
    /// Principal components reported (clamped to the data's rank).
    #[arg(long, default_value_t = 3)]
    components: usize,
    /// Label permutations for the sex test.
    #[arg(long, default_value_t = 1000)]
    n_perm: usize,
}

#[derive(Args)]
struct HeatmapArgs {
    #[command(flatten)]
    io: CohortIo,
    /// Covariate to test in every window.
    #[arg(long, value_enum)]
    covariate: Covariate,
    /// Homology dimension of the diagrams to analyze.
    #[arg(long, value_enum)]
    dim: HomDim,
    /// Largest window rank N; cells cover 1 <= n < N <= this.
    #[arg(long, default_value_t = 200)]
    n_max: usize,
    /// Label permutations per cell for the sex grid.
    #[arg(long, default_value_t = 1000)]
    n_perm: usize,
}

#[derive(Args)]
struct DistArgs {
    /// Distance to compute.
    #[arg(long, value_enum)]
    metric: DistMetric,
    /// Outer Wasserstein exponent.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Ground-norm exponent q (omitted = max-coordinate norm).
    #[arg(long)]
    ground_q: Option<f64>,
    /// First input file.
    a: PathBuf,
    /// Second input file.
    b: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for the tree files and manifest.csv.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    subjects: usize,
    #[arg(long, env = "TREEPH_SEED", default_value_t = 0)]
    seed: u64,
    /// Branch count range MIN,MAX per tree.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 15])]
    branches: Vec<usize>,
    /// Baseline downward bend depth (mm).
    #[arg(long, default_value_t = 2.0)]
    bend_base: f64,
    /// Bend depth added per year of age (mm/yr); 0 plants no age effect.
    #[arg(long, default_value_t = 0.0)]
    bend_age_slope: f64,
    /// Gaussian noise on the bend depth (mm).
    #[arg(long, default_value_t = 0.1)]
    bend_noise: f64,
    /// Probability that a branch carries a near-loop.
    #[arg(long, default_value_t = 0.3)]
    loop_probability: f64,
    /// Baseline near-loop radius (mm).
    #[arg(long, default_value_t = 5.0)]
    loop_radius: f64,
    /// Loop-radius multiplier for male subjects; 1 plants no sex effect.
    #[arg(long, default_value_t = 1.0)]
    sex_effect_size: f64,
    /// Subject age range MIN,MAX in years.
    #[arg(long, value_delimiter = ',', default_values_t = [20.0, 80.0])]
    age_range: Vec<f64>,
}

/// Print to stdout, treating a vanished reader (closed pipe) as a clean
/// end of output rather than a panic.
fn emit(text: impl std::fmt::Display) {
    use std::io::Write as _;
    if writeln!(std::io::stdout(), "{text}").is_err() {
        std::process::exit(0);
    }
}

fn config(io: &CohortIo) -> PipelineConfig {
    PipelineConfig {
        manifest: io.manifest.clone(),
        out_dir: io.out_dir.clone(),
        seed: io.seed,
        workers: io.workers,
        ..PipelineConfig::default()
    }
}

fn run(cli: Cli) -> Result<u8, PipelineError> {
    match cli.command {
        Command::Diagrams(args) => {
            if args.direction.len() != 3 {
                return Err(PipelineError::BadArg(format!(
                    "--direction needs exactly 3 components, got {}",
                    args.direction.len()
                )));
            }
            let cfg = PipelineConfig {
                direction: [args.direction[0], args.direction[1], args.direction[2]],
                subsample: args.subsample,
                max_scale: args.max_scale,
                dims: args.dims,
                force: args.force,
                ..config(&args.io)
            };
            let report = cmd_diagrams(&cfg)?;
            emit(format_args!(
                "diagrams: {} computed, {} skipped, {} failed",
                report.computed.len(),
                report.skipped.len(),
                report.failures.len()
            ));
            for failure in &report.failures {
                eprintln!("  {}: {}", failure.subject_id, failure.error);
            }
            Ok(if report.all_succeeded() { 0 } else { 2 })
        }
        Command::Featurize(args) => {
            let cfg = PipelineConfig {
                window: args.window,
                ..config(&args.io)
            };
            let path = cmd_featurize(&cfg, args.dim)?;
            emit(path.display());
            Ok(0)
        }
        Command::Analyze(args) => {
            let cfg = PipelineConfig {
                window: args.window,
                n_perm: args.n_perm,
                ..config(&args.io)
            };
            let report = cmd_analyze(&cfg, args.covariate, args.dim, args.control, args.components)?;
            emit(serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(0)
        }
        Command::Heatmap(args) => {
            let cfg = PipelineConfig {
                n_perm: args.n_perm,
                ..config(&args.io)
            };
            let (grid, path) = cmd_heatmap(&cfg, args.covariate, args.dim, args.n_max)?;
            emit(format_args!(
                "{} ({} cells)",
                path.display(),
                grid.cells.len()
            ));
            Ok(0)
        }
        Command::Dist(args) => {
            let d = cmd_dist(args.metric, args.p, args.ground_q, &args.a, &args.b)?;
            emit(d);
            Ok(0)
        }
        Command::Synth(args) => {
            if args.branches.len() != 2 {
                return Err(PipelineError::BadArg(
                    "--branches needs exactly MIN,MAX".into(),
                ));
            }
            if args.age_range.len() != 2 {
                return Err(PipelineError::BadArg(
                    "--age-range needs exactly MIN,MAX".into(),
                ));
            }
            let spec = SynthSpec {
                n_subjects: args.subjects,
                seed: args.seed,
                branch_count: (args.branches[0], args.branches[1]),
                bend_base: args.bend_base,
                bend_age_slope: args.bend_age_slope,
                bend_noise: args.bend_noise,
                loop_probability: args.loop_probability,
                loop_radius: args.loop_radius,
                sex_effect_size: args.sex_effect_size,
                age_range: (args.age_range[0], args.age_range[1]),
            };
            let manifest = cmd_synth(&spec, &args.out_dir)?;
            emit(manifest.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is a
            // usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(PipelineError::BadArg(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

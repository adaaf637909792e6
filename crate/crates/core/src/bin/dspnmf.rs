use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dspnmf::bench::{self, EvalMode, ExperimentPlan, PlotKind, PlotOptions};
use dspnmf::data::{DatasetManifest, LabelColumn, Orientation};
use dspnmf::evaluation::Metric;
use dspnmf::solvers::{Algorithm, DspRule, Similarity, SolverConfig};
use dspnmf::{NmfError, Result};

#[derive(Parser)]
#[command(name = "dspnmf", version, about = "Structure-preserving NMF and benchmark harness")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize one dataset and write W, H, the objective trace and fit.json.
    Fit(FitArgs),
    /// Run a dataset x algorithm x rank x lambda x run grid.
    Sweep(SweepArgs),
    /// Turn a trace or sweep output into x,y,series CSV.
    Plotdata(PlotArgs),
    /// Count how often each algorithm ranks first in a summary CSV.
    Rankfirst(RankArgs),
}

#[derive(Args, Default)]
struct SolverArgs {
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gnmf_lambda: Option<f64>,
    #[arg(long)]
    graph_k: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// appendix_consistent or main_text.
    #[arg(long)]
    dsp_rule: Option<DspRule>,
    /// gram or knn_graph (SymmNMF only).
    #[arg(long)]
    similarity: Option<Similarity>,
}

impl SolverArgs {
    fn apply(&self, c: &mut SolverConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })* };
        }
        set!(algorithm, rank, lambda, gnmf_lambda, graph_k, max_iter, rel_tol, seed, dsp_rule, similarity);
    }
}

#[derive(Args)]
struct FitArgs {
    /// Dataset manifest (JSON).
    #[arg(long, conflicts_with = "csv")]
    manifest: Option<PathBuf>,
    /// Plain CSV file instead of a manifest.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Label column (name or 0-based index) for --csv.
    #[arg(long, requires = "csv")]
    label_column: Option<LabelColumn>,
    #[arg(long, default_value = "samples_as_rows", requires = "csv")]
    orientation: Orientation,
    /// Solver settings as JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Fit the raw values instead of min-max normalized features.
    #[arg(long)]
    no_normalize: bool,
    #[arg(short, long, default_value = "fit_output")]
    output: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment plan (JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset manifest; repeat for several.
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    knn_k: Option<usize>,
    /// transductive or fixed_basis.
    #[arg(long)]
    eval_mode: Option<EvalMode>,
    #[arg(long)]
    no_normalize: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// trace.csv for convergence, results or summary CSV otherwise.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    kind: PlotKind,
    #[arg(long, default_value = "nmi")]
    metric: Metric,
    /// Use the per-cell max instead of the mean.
    #[arg(long)]
    max: bool,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rank: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    /// Summary CSV from a sweep.
    #[arg(long)]
    input: PathBuf,
    /// Keep only rows with this lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Also write the cross-dataset averages here.
    #[arg(long)]
    averages: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| NmfError::Schema(format!("{}: {e}", path.display())))
}

fn run_fit(args: FitArgs) -> Result<ExitCode> {
    let manifest = match (&args.manifest, &args.csv) {
        (Some(m), _) => DatasetManifest::load(m)?,
        (None, Some(c)) => DatasetManifest {
            orientation: args.orientation,
            ..DatasetManifest::for_csv(c, args.label_column.clone())
        },
        (None, None) => return Err(NmfError::Input("give --manifest or --csv".into())),
    };
    let mut config = match &args.config {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    args.solver.apply(&mut config);
    let data = manifest.load_dataset::<f64>()?;
    let data = if args.no_normalize { data } else { data.normalized() };
    let s = bench::cmd_fit(&data, &config, &args.output)?;
    println!(
        "{}: {} r={} iterations={} converged={} objective={} diag_deviation={}",
        s.dataset,
        s.config.algorithm,
        s.config.rank,
        s.iterations_run,
        s.converged,
        s.final_objective.map_or("-".into(), |f| format!("{f:.6e}")),
        s.diag_deviation.map_or("-".into(), |d| format!("{d:.4}")),
    );
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut plan = match &args.config {
        Some(p) => ExperimentPlan::load(p)?,
        None => ExperimentPlan::default(),
    };
    if !args.datasets.is_empty() {
        // Command-line paths are relative to the working directory.
        plan.datasets = args
            .datasets
            .iter()
            .map(|p| std::path::absolute(p).unwrap_or_else(|_| p.clone()))
            .collect();
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = args.$f.clone() { plan.$f = v; })* };
    }
    set!(algorithms, ranks, lambdas, runs, folds, base_seed, output_dir, knn_k, eval_mode);
    if args.no_normalize {
        plan.normalize = false;
    }
    args.solver.apply(&mut plan.solver);
    let (report, outcome) = bench::cmd_sweep(&plan, args.jobs)?;
    println!(
        "{} result rows, {} summary rows, {} failed, {:.1}s -> {}",
        report.results.len(),
        report.summary.len(),
        report.failures,
        report.wall_time_secs,
        plan.output_dir.display()
    );
    Ok(ExitCode::from(outcome.code() as u8))
}

fn run_plot(args: PlotArgs) -> Result<ExitCode> {
    let opts = PlotOptions {
        metric: args.metric,
        use_max: args.max,
        dataset: args.dataset,
        algorithm: args.algorithm,
        lambda: args.lambda,
        rank: args.rank,
    };
    let mut out = output_writer(args.output.as_deref())?;
    bench::cmd_plotdata(&args.input, args.kind, &opts, &mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run_rank(args: RankArgs) -> Result<ExitCode> {
    let mut out = output_writer(args.output.as_deref())?;
    let table = bench::cmd_rankfirst(&args.input, args.lambda, &mut out)?;
    out.flush()?;
    if let Some(p) = &args.averages {
        table.write_averages(BufWriter::new(File::create(p)?))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Plotdata(a) => run_plot(a),
        Command::Rankfirst(a) => run_rank(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for usage or configuration errors, 1 for
//! failures during the computation itself.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harness::{self, ExperimentSpec, Metric, RegretTrace, TracePoint};
use crate::ingest::{self, ArmMeansTable};
use crate::theory::{self, BoundParams, SelectionVariant};

#[derive(Debug, Parser)]
#[command(name = "tsvha", version, about = "Thompson sampling with virtual helping agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a regret experiment and write per-policy trace CSVs.
    Run(ExperimentArgs),
    /// Run fixed-budget best-arm identification for each `[bai].budgets` entry.
    Bai(ExperimentArgs),
    /// Evaluate the finite-time regret bound over a parameter grid.
    Bound(BoundArgs),
    /// Tabulate two-armed selection probabilities of TS, C1 and C2.
    Analyze(AnalyzeArgs),
    /// Convert a dataset CSV into an arm-means instance file.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output].dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[experiment].seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    gamma: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    beta: Vec<f64>,
    #[arg(long = "eps", value_delimiter = ',', num_args = 1.., required = true)]
    epsilon: Vec<f64>,
    /// Gaps of the suboptimal arms; one instance shared by every grid point.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    gaps: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    horizons: Vec<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    mu1: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    mu2: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    k1: Vec<u64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    k2: Vec<u64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "3")]
    agents: Vec<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Transform {
    /// Input is already `arm_id,mean`.
    None,
    /// `arm_id,purchase_rate,price`.
    Coupon,
    /// `arm_id,certified,participants`.
    Edx,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    transform: Transform,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status. Diagnostics go to stderr.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => cmd_run(&args),
        Command::Bai(args) => cmd_bai(&args),
        Command::Bound(args) => cmd_bound(&args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Ingest(args) => cmd_ingest(&args),
    }
}

fn load_experiment(args: &ExperimentArgs) -> Result<(RunConfig, ExperimentSpec, PathBuf)> {
    let cfg = RunConfig::load(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let mut spec = cfg.to_spec(base)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    if args.workers == Some(0) {
        return Err(Error::config("--workers must be at least 1"));
    }
    let out = match (&args.out, &cfg.output) {
        (Some(dir), _) => dir.clone(),
        (None, Some(o)) => base.join(&o.dir),
        (None, None) => PathBuf::from("."),
    };
    Ok((cfg, spec, out))
}

fn cmd_run(args: &ExperimentArgs) -> Result<()> {
    let (_, spec, out) = load_experiment(args)?;
    let traces = harness::run_experiment_with_workers(&spec, args.workers)?;
    create_dir(&out)?;
    for trace in &traces {
        write_trace(&out.join(format!("trace_{}.csv", trace.policy)), &trace.cumulative, trace.runs)?;
        if spec.metrics.contains(&Metric::PerPeriodRegret) {
            write_trace(
                &out.join(format!("per_period_{}.csv", trace.policy)),
                &trace.per_period,
                trace.runs,
            )?;
        }
        if spec.metrics.contains(&Metric::FinalRegretDistribution) {
            write_final(&out.join(format!("final_{}.csv", trace.policy)), trace)?;
        }
    }
    Ok(())
}

fn cmd_bai(args: &ExperimentArgs) -> Result<()> {
    let (cfg, spec, out) = load_experiment(args)?;
    let budgets = cfg
        .bai
        .as_ref()
        .map(|b| b.budgets.clone())
        .ok_or_else(|| Error::config("the bai command needs a [bai] section with budgets"))?;
    let mut rows = Vec::new();
    for budget in budgets {
        for r in harness::bai_experiment_with_workers(&spec, budget, args.workers)? {
            rows.push(format!("{},{},{},{}", r.budget, r.policy, r.error_rate, r.runs));
        }
    }
    create_dir(&out)?;
    write_lines(&out.join("bai.csv"), "budget,policy,error_rate,runs", &rows)
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    let mut rows = Vec::new();
    for &gamma in &args.gamma {
        for &beta in &args.beta {
            for &epsilon in &args.epsilon {
                for &horizon in &args.horizons {
                    let params = BoundParams {
                        gamma,
                        beta,
                        epsilon,
                        gaps: args.gaps.clone(),
                        horizon,
                    };
                    // invalid parameters are a usage problem, not a runtime failure
                    params.validate().map_err(|e| Error::config(e.to_string()))?;
                    let bound = theory::theorem1_bound(&params)?;
                    rows.push(format!("{gamma},{beta},{epsilon},{horizon},{bound}"));
                }
            }
        }
    }
    create_dir(&args.out)?;
    write_lines(&args.out.join("bound.csv"), "gamma,beta,epsilon,T,bound", &rows)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    if args.agents.contains(&0) {
        return Err(Error::config("--agents values must be at least 1"));
    }
    let mut rows = Vec::new();
    for &mu1 in &args.mu1 {
        for &mu2 in &args.mu2 {
            if !mu1.is_finite() || !mu2.is_finite() {
                return Err(Error::config("--mu1 and --mu2 must be finite"));
            }
            for &k1 in &args.k1 {
                for &k2 in &args.k2 {
                    let mut variants = vec![SelectionVariant::Ts];
                    for &n in &args.agents {
                        variants.push(SelectionVariant::C1(n));
                        variants.push(SelectionVariant::C2(n));
                    }
                    for v in variants {
                        let p = theory::selection_probability(mu1, mu2, k1, k2, v)?;
                        rows.push(format!("{mu1},{mu2},{k1},{k2},{},{},{p}", v.name(), v.agents()));
                    }
                }
            }
        }
    }
    create_dir(&args.out)?;
    write_lines(&args.out.join("analyze.csv"), "mu1,mu2,k1,k2,variant,N,p_star", &rows)
}

fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let table: ArmMeansTable = match args.transform {
        Transform::None => ingest::load_arm_means_csv(&args.input)?,
        Transform::Coupon => ingest::load_coupon_csv(&args.input)?,
        Transform::Edx => ingest::load_edx_csv(&args.input)?,
    };
    create_dir(&args.out)?;
    table.save(&args.out.join("instance.csv"))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_lines(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let io = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{header}").map_err(io)?;
    for row in rows {
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_trace(path: &Path, points: &[TracePoint], runs: u64) -> Result<()> {
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            let s = &p.summary;
            let q = &s.quantiles;
            format!(
                "{},{},{},{},{},{},{},{},{}",
                p.t, s.mean, s.std, q[0], q[1], q[2], q[3], q[4], runs
            )
        })
        .collect();
    write_lines(path, "t,mean,std,q10,q25,q50,q75,q90,runs", &rows)
}

fn write_final(path: &Path, trace: &RegretTrace) -> Result<()> {
    let rows: Vec<String> = trace
        .final_regret
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{i},{r}"))
        .collect();
    write_lines(path, "run,final_regret", &rows)
}

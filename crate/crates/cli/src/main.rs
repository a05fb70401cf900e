use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rbfmix::bench::{load_instances, run_suite, AlgorithmEntry, SuiteFile};
use rbfmix::engine::{run, RunResult, RunStatus};
use rbfmix::parallel::run_parallel;
use rbfmix::problem::file::ProblemFile;
use rbfmix::problem::ProblemSpec;
use rbfmix::testbed::list_instances;

const OUT_ENV: &str = "RBFMIX_OUT";
const DEFAULT_OUT: &str = "rbfmix-out";

#[derive(Parser)]
#[command(name = "rbfmix", version, about = "RBF surrogate optimizer for mixed-variable black-box problems")]
struct Cli {
    /// Print the built-in test instances and exit.
    #[arg(long)]
    list_instances: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize the problem described by a JSON file.
    Solve(SolveArgs),
    /// Benchmark suites.
    Bench {
        #[command(subcommand)]
        command: BenchCmd,
    },
    /// Print the built-in test instances.
    ListInstances,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rbf {
    Auto,
    Linear,
    Cubic,
    Multiquadric,
    ThinPlate,
    Gaussian,
}

impl Rbf {
    fn name(self) -> &'static str {
        match self {
            Rbf::Auto => "auto",
            Rbf::Linear => "linear",
            Rbf::Cubic => "cubic",
            Rbf::Multiquadric => "multiquadric",
            Rbf::ThinPlate => "thin_plate",
            Rbf::Gaussian => "gaussian",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Msrsm,
    Gutmann,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsolverArg {
    Ga,
    Sampling,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON).
    file: PathBuf,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    #[arg(long, value_enum)]
    subsolver: Option<SubsolverArg>,
    /// Evaluation budget; default 50 (n + 1).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count; 2 or more runs the asynchronous parallel optimizer.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    rbf: Option<Rbf>,
    /// Refinement frequency in cycles; 0 disables refinement.
    #[arg(long)]
    refine_freq: Option<usize>,
    /// Cycle length.
    #[arg(long)]
    kappa: Option<usize>,
    /// Simulated evaluation latency, `lognormal:mu,sigma,cap` or `constant:t`.
    #[arg(long)]
    simulate_latency: Option<String>,
    /// Output directory; defaults to $RBFMIX_OUT, then `rbfmix-out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Run a benchmark suite and write traces, profiles and a summary.
    Run {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Comma-separated tolerances.
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4")]
        tau: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Errors that map to exit status 1 with a diagnostic.
struct Malformed(anyhow::Error);

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn format_point(spec: &ProblemSpec, point: &[f64]) -> String {
    let numeric = spec.n_r() + spec.n_d();
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i >= numeric {
                if let Some(label) = spec.category_label(i - numeric, v) {
                    return label.to_string();
                }
            }
            v.to_string()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn solve(args: SolveArgs) -> std::result::Result<RunResult, Malformed> {
    let file = ProblemFile::load(&args.file).map_err(|e| Malformed(e.into()))?;
    let spec = file.to_spec().map_err(|e| Malformed(e.into()))?;
    let opts = &file.options;
    let algorithm = match args.algorithm {
        Some(AlgorithmArg::Msrsm) => "msrsm".to_string(),
        Some(AlgorithmArg::Gutmann) => "gutmann".to_string(),
        None => opts.algorithm.clone().unwrap_or_else(|| "msrsm".into()),
    };
    let subsolver = match args.subsolver {
        Some(SubsolverArg::Ga) => "ga".to_string(),
        Some(SubsolverArg::Sampling) => "sampling".to_string(),
        None => opts.subsolver.clone().unwrap_or_else(|| "ga".into()),
    };
    let entry = AlgorithmEntry {
        name: "solve".into(),
        algorithm,
        subsolver,
        rbf: args
            .rbf
            .map(|r| r.name().to_string())
            .or_else(|| opts.rbf.clone())
            .unwrap_or_else(|| "auto".into()),
        refine_freq: args.refine_freq.or(opts.refine_freq),
        kappa: args.kappa.or(opts.kappa),
        threads: args.threads.or(opts.threads),
        simulate_latency: args.simulate_latency.clone().or_else(|| opts.simulate_latency.clone()),
    };
    let (mut cfg, parallel) = entry.configs().map_err(|e| Malformed(e.into()))?;
    cfg.budget = args.budget.or(opts.budget);
    cfg.seed = args.seed.or(opts.seed).unwrap_or(0);

    let result = match &parallel {
        Some(pc) => run_parallel(&spec, &cfg, pc).map(|r| r.run),
        None => run(&spec, &cfg),
    }
    .map_err(|e| Malformed(anyhow::Error::from(e).context("optimization failed")))?;

    let dir = out_dir(args.out);
    write_artifacts(&dir, &result).map_err(Malformed)?;
    match &result.best_point {
        Some(p) if result.best_value.is_finite() => {
            println!("best value: {}", result.best_value);
            println!("best point: {}", format_point(&spec, &p.0));
        }
        _ => println!("no successful evaluation"),
    }
    println!("evaluations: {}", result.trace.len());
    println!("output: {}", dir.display());
    Ok(result)
}

fn write_artifacts(dir: &Path, result: &RunResult) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    result.trace.save_csv(&dir.join("trace.csv"))?;
    result.summary().save_json(&dir.join("summary.json"))?;
    Ok(())
}

fn bench(suite: &Path, seeds: usize, tau: &[f64], out: Option<PathBuf>) -> std::result::Result<(), Malformed> {
    let file = SuiteFile::load(suite).map_err(|e| Malformed(e.into()))?;
    let instances = load_instances(&file.instances).map_err(|e| Malformed(e.into()))?;
    let dir = out_dir(out);
    let report = run_suite(&instances, &file.algorithms, seeds, tau, Some(&dir)).map_err(|e| Malformed(e.into()))?;
    for table in &report.tables {
        println!("tau = {}", table.tau);
        for (a, name) in table.algorithms.iter().enumerate() {
            let solved = table.t.iter().filter(|row| row[a].is_some()).count();
            println!("  {name}: solved {solved}/{}", table.problems.len());
        }
    }
    for f in &report.failures {
        eprintln!("run failed: {f}");
    }
    println!("output: {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_instances {
        for name in list_instances() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let outcome = match cli.command {
        Some(Cmd::ListInstances) => {
            for name in list_instances() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Some(Cmd::Solve(args)) => solve(args).map(|r| r.status),
        Some(Cmd::Bench {
            command: BenchCmd::Run { suite, seeds, tau, out },
        }) => bench(&suite, seeds, &tau, out).map(|_| RunStatus::Completed),
        None => {
            eprintln!("error: no command given; see --help");
            return ExitCode::from(1);
        }
    };
    match outcome {
        Ok(RunStatus::Completed) => ExitCode::SUCCESS,
        Ok(RunStatus::Aborted) => {
            eprintln!("run aborted after repeated restarts");
            ExitCode::from(2)
        }
        Err(Malformed(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

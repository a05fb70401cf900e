//! Benchmark harness: convergence test, data and performance profiles,
//! median aggregation over seeds and report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{read_trace_csv, run, ModelChoice, OptimizerConfig};
use crate::error::{Error, Result};
use crate::parallel::{run_parallel, ExecutorKind, ParallelConfig};
use crate::rbf::RbfKind;
use crate::refine::RefineConfig;
use crate::search::Algorithm;
use crate::subsolver::{GaConfig, SamplingConfig, Subsolver};
use crate::testbed::{builtin, TestInstance};

/// Whether `f_best` closes at least `1 - tau` of the gap between `f_x0`
/// and `f_star`.
pub fn converged(f_x0: f64, f_best: f64, f_star: f64, tau: f64) -> bool {
    if f_x0 == f_star {
        return true;
    }
    f_x0 - f_best >= (1.0 - tau) * (f_x0 - f_star)
}

/// First 1-based evaluation index at which `curve` has converged.
pub fn solve_index(curve: &[f64], f_x0: f64, f_star: f64, tau: f64) -> Option<usize> {
    curve
        .iter()
        .position(|&f| converged(f_x0, f, f_star, tau))
        .map(|i| i + 1)
}

/// Evaluations to solve each problem, per algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub tau: f64,
    pub problems: Vec<String>,
    pub algorithms: Vec<String>,
    /// Number of variables of each problem.
    pub n: Vec<usize>,
    /// `t[p][a]`; `None` when unsolved.
    pub t: Vec<Vec<Option<usize>>>,
}

impl ProfileTable {
    /// Fraction of problems solved by algorithm `a` within `alpha (n_p + 1)`
    /// evaluations.
    pub fn data_profile_at(&self, a: usize, alpha: f64) -> f64 {
        if self.problems.is_empty() {
            return 0.0;
        }
        let solved = (0..self.problems.len())
            .filter(|&p| self.t[p][a].is_some_and(|t| t as f64 / (self.n[p] + 1) as f64 <= alpha))
            .count();
        solved as f64 / self.problems.len() as f64
    }

    /// Performance ratios `t[p][a] / min_a t[p][a]`. Rows of problems that
    /// no algorithm solved are `None`; unsolved entries are `+inf`.
    pub fn ratios(&self) -> Vec<Option<Vec<f64>>> {
        self.t
            .iter()
            .map(|row| {
                let best = row.iter().flatten().min()?;
                Some(
                    row.iter()
                        .map(|t| t.map_or(f64::INFINITY, |t| t as f64 / *best as f64))
                        .collect(),
                )
            })
            .collect()
    }

    /// Fraction of problems (among those some algorithm solved) on which
    /// `a` is within a factor `alpha` of the best.
    pub fn performance_profile_at(&self, a: usize, alpha: f64) -> f64 {
        let rows: Vec<Vec<f64>> = self.ratios().into_iter().flatten().collect();
        if rows.is_empty() {
            return 0.0;
        }
        rows.iter().filter(|r| r[a] <= alpha).count() as f64 / rows.len() as f64
    }
}

/// Data profile of every algorithm sampled on `alphas`.
pub fn data_profile(table: &ProfileTable, alphas: &[f64]) -> Vec<Vec<f64>> {
    (0..table.algorithms.len())
        .map(|a| alphas.iter().map(|&x| table.data_profile_at(a, x)).collect())
        .collect()
}

/// Performance profile of every algorithm sampled on `alphas`.
pub fn performance_profile(table: &ProfileTable, alphas: &[f64]) -> Vec<Vec<f64>> {
    (0..table.algorithms.len())
        .map(|a| alphas.iter().map(|&x| table.performance_profile_at(a, x)).collect())
        .collect()
}

/// `(prod (t_i + 1))^(1/k) - 1`.
pub fn shifted_geomean(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::Config("shifted geometric mean of no values".into()));
    }
    let mean_log = times.iter().map(|t| (t + 1.0).ln()).sum::<f64>() / times.len() as f64;
    Ok(mean_log.exp() - 1.0)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-evaluation median of best-so-far curves. Shorter curves are
/// extended with their last value.
pub fn median_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut col: Vec<f64> = curves
                .iter()
                .filter(|c| !c.is_empty())
                .map(|c| c[i.min(c.len() - 1)])
                .collect();
            median(&mut col)
        })
        .collect()
}

/// Aggregated curves of one problem and the reference values derived
/// from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemCurves {
    pub problem: String,
    pub n: usize,
    pub known_best: Option<f64>,
    /// Median curve per algorithm; `None` when every run failed.
    pub curves: Vec<Option<Vec<f64>>>,
}

impl ProblemCurves {
    /// Largest first value across algorithms.
    pub fn f_x0(&self) -> f64 {
        self.curves
            .iter()
            .flatten()
            .filter_map(|c| c.first().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Known optimum, else the best value of any aggregated curve.
    pub fn f_star(&self) -> f64 {
        self.known_best.unwrap_or_else(|| {
            self.curves
                .iter()
                .flatten()
                .filter_map(|c| c.last().copied())
                .fold(f64::INFINITY, f64::min)
        })
    }

    pub fn solve_times(&self, tau: f64) -> Vec<Option<usize>> {
        let (x0, star) = (self.f_x0(), self.f_star());
        self.curves
            .iter()
            .map(|c| c.as_ref().and_then(|c| solve_index(c, x0, star, tau)))
            .collect()
    }
}

/// Builds the profile table for one `tau`.
pub fn profile_table(curves: &[ProblemCurves], algorithms: &[String], tau: f64) -> ProfileTable {
    ProfileTable {
        tau,
        problems: curves.iter().map(|c| c.problem.clone()).collect(),
        algorithms: algorithms.to_vec(),
        n: curves.iter().map(|c| c.n).collect(),
        t: curves.iter().map(|c| c.solve_times(tau)).collect(),
    }
}

/// How to build an optimizer configuration; also the JSON schema of the
/// `algorithms` entries of a suite file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub name: String,
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    #[serde(default = "default_subsolver")]
    pub subsolver: String,
    #[serde(default = "default_rbf")]
    pub rbf: String,
    /// Refinement frequency in cycles; 0 disables refinement.
    #[serde(default)]
    pub refine_freq: Option<usize>,
    #[serde(default)]
    pub kappa: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Latency model for the simulated parallel executor.
    #[serde(default)]
    pub simulate_latency: Option<String>,
}

fn default_algorithm() -> String {
    "msrsm".into()
}

fn default_subsolver() -> String {
    "ga".into()
}

fn default_rbf() -> String {
    "auto".into()
}

pub fn parse_algorithm(name: &str) -> Result<Algorithm> {
    match name {
        "msrsm" => Ok(Algorithm::Msrsm),
        "gutmann" => Ok(Algorithm::Gutmann),
        _ => Err(Error::Config(format!("unknown algorithm `{name}`"))),
    }
}

pub fn parse_subsolver(name: &str) -> Result<Subsolver> {
    match name {
        "ga" => Ok(Subsolver::Ga(GaConfig::default())),
        "sampling" => Ok(Subsolver::Sampling(SamplingConfig::default())),
        _ => Err(Error::Config(format!("unknown subsolver `{name}`"))),
    }
}

pub fn parse_model(name: &str) -> Result<ModelChoice> {
    if name == "auto" {
        return Ok(ModelChoice::Auto);
    }
    RbfKind::from_name(name)
        .map(ModelChoice::Fixed)
        .ok_or_else(|| Error::Config(format!("unknown kernel `{name}`")))
}

impl AlgorithmEntry {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            algorithm: default_algorithm(),
            subsolver: default_subsolver(),
            rbf: default_rbf(),
            refine_freq: None,
            kappa: None,
            threads: None,
            simulate_latency: None,
        }
    }

    /// Serial configuration and, for two or more threads, the parallel one.
    pub fn configs(&self) -> Result<(OptimizerConfig, Option<ParallelConfig>)> {
        let mut cfg = OptimizerConfig {
            algorithm: parse_algorithm(&self.algorithm)?,
            subsolver: parse_subsolver(&self.subsolver)?,
            model: parse_model(&self.rbf)?,
            ..Default::default()
        };
        if let Some(k) = self.kappa {
            cfg.kappa = k;
        }
        match self.refine_freq {
            Some(0) => cfg.refine = None,
            Some(t) => {
                cfg.refine = Some(RefineConfig {
                    t_rf: t,
                    ..RefineConfig::default()
                })
            }
            None => {}
        }
        let threads = self.threads.unwrap_or(1);
        let parallel = if threads >= 2 {
            let executor = match &self.simulate_latency {
                Some(text) => ExecutorKind::Simulated(crate::engine::LatencyModel::parse(text)?),
                None => ExecutorKind::Threads,
            };
            Some(ParallelConfig {
                workers: threads,
                executor,
                ..ParallelConfig::default()
            })
        } else {
            if let Some(text) = &self.simulate_latency {
                cfg.clock = crate::engine::ClockMode::Simulated(crate::engine::LatencyModel::parse(text)?);
            }
            None
        };
        Ok((cfg, parallel))
    }
}

/// Suite file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub instances: Vec<String>,
    pub algorithms: Vec<AlgorithmEntry>,
}

impl SuiteFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
        })
    }
}

/// Everything a suite run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub algorithms: Vec<String>,
    pub seeds: usize,
    pub taus: Vec<f64>,
    pub problems: Vec<ProblemCurves>,
    pub tables: Vec<ProfileTable>,
    /// Runs that returned an error, as `instance/algorithm/seed`.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn table(&self, tau: f64) -> Option<&ProfileTable> {
        self.tables.iter().find(|t| t.tau == tau)
    }
}

fn trace_name(problem: &str, algorithm: &str, seed: u64) -> String {
    let clean = |s: &str| s.replace(|c: char| !c.is_ascii_alphanumeric() && c != '_' && c != '-', "_");
    format!("{}__{}__s{seed}.csv", clean(problem), clean(algorithm))
}

/// Runs every (instance, algorithm, seed) combination with seeds
/// `0..seeds`, aggregates by median and builds one profile table per `tau`.
/// With `out_dir`, traces, profile CSVs and plots and `summary.json` are
/// written there.
pub fn run_suite(
    instances: &[TestInstance],
    algorithms: &[AlgorithmEntry],
    seeds: usize,
    taus: &[f64],
    out_dir: Option<&Path>,
) -> Result<SuiteReport> {
    if seeds == 0 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let configs: Vec<_> = algorithms.iter().map(AlgorithmEntry::configs).collect::<Result<_>>()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir.join("traces"))?;
        std::fs::create_dir_all(dir.join("profiles"))?;
    }
    let jobs: Vec<(usize, usize, u64)> = (0..instances.len())
        .flat_map(|p| (0..algorithms.len()).flat_map(move |a| (0..seeds as u64).map(move |s| (p, a, s))))
        .collect();
    let results: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(p, a, seed)| {
            let (cfg, par) = &configs[a];
            let cfg = OptimizerConfig {
                seed,
                ..cfg.clone()
            };
            let spec = &instances[p].spec;
            let run = match par {
                Some(pc) => run_parallel(spec, &cfg, pc)?.run,
                None => run(spec, &cfg)?,
            };
            if let Some(dir) = out_dir {
                let name = trace_name(&instances[p].name, &algorithms[a].name, seed);
                run.trace.save_csv(&dir.join("traces").join(name))?;
            }
            Ok(run.trace.best_curve())
        })
        .collect();

    let mut failures = Vec::new();
    let mut grouped: BTreeMap<(usize, usize), Vec<Vec<f64>>> = BTreeMap::new();
    for (&(p, a, seed), r) in jobs.iter().zip(results) {
        match r {
            Ok(curve) if !curve.is_empty() => grouped.entry((p, a)).or_default().push(curve),
            Ok(_) => failures.push(format!("{}/{}/{seed}: no evaluations", instances[p].name, algorithms[a].name)),
            Err(e) => failures.push(format!("{}/{}/{seed}: {e}", instances[p].name, algorithms[a].name)),
        }
    }
    let names: Vec<String> = algorithms.iter().map(|a| a.name.clone()).collect();
    let problems: Vec<ProblemCurves> = instances
        .iter()
        .enumerate()
        .map(|(p, inst)| ProblemCurves {
            problem: inst.name.clone(),
            n: inst.n_vars(),
            known_best: inst.known_best,
            curves: (0..algorithms.len())
                .map(|a| grouped.get(&(p, a)).map(|c| median_curve(c)))
                .collect(),
        })
        .collect();
    let tables: Vec<ProfileTable> = taus.iter().map(|&tau| profile_table(&problems, &names, tau)).collect();
    let report = SuiteReport {
        algorithms: names,
        seeds,
        taus: taus.to_vec(),
        problems,
        tables,
        failures,
    };
    if let Some(dir) = out_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

/// Recomputes the profile tables from the trace CSVs of a suite directory.
pub fn recompute_tables(dir: &Path) -> Result<Vec<ProfileTable>> {
    let text = std::fs::read_to_string(dir.join("summary.json"))?;
    let report: SuiteReport = serde_json::from_str(&text)?;
    let mut problems = Vec::new();
    for pc in &report.problems {
        let mut curves = Vec::new();
        for a in &report.algorithms {
            let mut runs = Vec::new();
            for seed in 0..report.seeds as u64 {
                let path = dir.join("traces").join(trace_name(&pc.problem, a, seed));
                if path.exists() {
                    let rows = read_trace_csv(&path)?;
                    if !rows.is_empty() {
                        runs.push(rows.iter().map(|r| r.best).collect::<Vec<f64>>());
                    }
                }
            }
            curves.push((!runs.is_empty()).then(|| median_curve(&runs)));
        }
        problems.push(ProblemCurves {
            problem: pc.problem.clone(),
            n: pc.n,
            known_best: pc.known_best,
            curves,
        });
    }
    Ok(report
        .taus
        .iter()
        .map(|&tau| profile_table(&problems, &report.algorithms, tau))
        .collect())
}

/// Grid for data profiles: `0, 1, ..` up to the largest budget in units of
/// `n_p + 1`.
pub fn data_grid(curves: &[ProblemCurves]) -> Vec<f64> {
    let max_units = curves
        .iter()
        .flat_map(|c| c.curves.iter().flatten().map(move |v| v.len() as f64 / (c.n + 1) as f64))
        .fold(0.0f64, f64::max)
        .ceil() as usize;
    (0..=max_units).map(|a| a as f64).collect()
}

/// Grid for performance profiles: 1 and every finite ratio.
pub fn ratio_grid(table: &ProfileTable) -> Vec<f64> {
    let mut grid: Vec<f64> = table
        .ratios()
        .into_iter()
        .flatten()
        .flatten()
        .filter(|r| r.is_finite())
        .chain([1.0])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn profile_csv(alphas: &[f64], names: &[String], curves: &[Vec<f64>]) -> String {
    let mut s = String::from("alpha");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (i, a) in alphas.iter().enumerate() {
        s.push_str(&a.to_string());
        for c in curves {
            s.push(',');
            s.push_str(&c[i].to_string());
        }
        s.push('\n');
    }
    s
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Self-contained SVG step plot of profile curves.
pub fn profile_svg(title: &str, x_label: &str, alphas: &[f64], names: &[String], curves: &[Vec<f64>]) -> String {
    let (w, h, margin) = (640.0, 420.0, 60.0);
    let x_min = alphas.first().copied().unwrap_or(0.0);
    let x_max = alphas.last().copied().unwrap_or(1.0).max(x_min + 1e-9);
    let sx = |x: f64| margin + (x - x_min) / (x_max - x_min) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - y * (h - 2.0 * margin);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{b}" x2="{m}" y2="{m}" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin
    );
    for k in 0..=4 {
        let y = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{y}</text>"#,
            margin - 6.0,
            sy(y) + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="start">{x_min}</text>"#, margin, h - margin + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{x_max}</text>"#, w - margin, h - margin + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 16.0);
    for (i, (name, c)) in names.iter().zip(curves).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = String::new();
        for (j, (&x, &y)) in alphas.iter().zip(c).enumerate() {
            if j > 0 {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(c[j - 1]));
            }
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.trim_end());
        let ly = margin + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{name}</text>"#,
            w - margin - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write_report(report: &SuiteReport, dir: &Path) -> Result<()> {
    let profiles = dir.join("profiles");
    let grid = data_grid(&report.problems);
    for table in &report.tables {
        let tag = format!("tau{}", table.tau);
        let d = data_profile(table, &grid);
        std::fs::write(profiles.join(format!("data_{tag}.csv")), profile_csv(&grid, &table.algorithms, &d))?;
        std::fs::write(
            profiles.join(format!("data_{tag}.svg")),
            profile_svg(&format!("Data profile, tau = {}", table.tau), "alpha = evaluations / (n + 1)", &grid, &table.algorithms, &d),
        )?;
        let rgrid = ratio_grid(table);
        let p = performance_profile(table, &rgrid);
        std::fs::write(profiles.join(format!("perf_{tag}.csv")), profile_csv(&rgrid, &table.algorithms, &p))?;
        std::fs::write(
            profiles.join(format!("perf_{tag}.svg")),
            profile_svg(&format!("Performance profile, tau = {}", table.tau), "performance ratio", &rgrid, &table.algorithms, &p),
        )?;
    }
    let file = std::fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), report)?;
    Ok(())
}

/// Resolves instance names through the test-problem registry.
pub fn load_instances(names: &[String]) -> Result<Vec<TestInstance>> {
    names.iter().map(|n| builtin(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: Vec<usize>, t: Vec<Vec<Option<usize>>>) -> ProfileTable {
        let algos = t[0].len();
        ProfileTable {
            tau: 1e-2,
            problems: (0..t.len()).map(|p| format!("p{p}")).collect(),
            algorithms: (0..algos).map(|a| format!("a{a}")).collect(),
            n,
            t,
        }
    }

    #[test]
    fn convergence_examples() {
        assert!(converged(10.0, 0.05, 0.0, 1e-2));
        assert!(!converged(10.0, 0.2, 0.0, 1e-2));
        assert!(converged(3.0, 3.0, 3.0, 1e-4));
    }

    #[test]
    fn data_profile_examples() {
        let tab = table(vec![1, 3], vec![vec![Some(20)], vec![None]]);
        assert_eq!(tab.data_profile_at(0, 10.0), 0.5);
        assert_eq!(tab.data_profile_at(0, 9.0), 0.0);
        assert_eq!(tab.data_profile_at(0, 4.0), 0.0);
        let none = table(vec![1, 1], vec![vec![None], vec![None]]);
        assert!(data_profile(&none, &[0.0, 10.0, 1e9])[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ratio_examples() {
        let tab = table(vec![2], vec![vec![Some(10), Some(20)]]);
        assert_eq!(tab.ratios()[0], Some(vec![1.0, 2.0]));
        assert_eq!(tab.performance_profile_at(0, 1.0), 1.0);
        assert_eq!(tab.performance_profile_at(1, 1.0), 0.0);
        let unsolved = table(vec![2, 2], vec![vec![None, None], vec![Some(5), None]]);
        assert_eq!(unsolved.ratios()[0], None);
        assert_eq!(unsolved.performance_profile_at(0, 1.0), 1.0);
    }

    #[test]
    fn geomean_examples() {
        assert_eq!(shifted_geomean(&[0.0, 3.0]).unwrap(), 1.0);
        assert!((shifted_geomean(&[7.5]).unwrap() - 7.5).abs() < 1e-12);
        assert!((shifted_geomean(&[2.0, 2.0, 2.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!(shifted_geomean(&[]).is_err());
    }

    #[test]
    fn median_of_curves() {
        let c = median_curve(&[vec![5.0, 3.0, 1.0], vec![4.0, 4.0], vec![6.0, 2.0, 2.0]]);
        assert_eq!(c, vec![5.0, 3.0, 2.0]);
        assert!(c.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn single_run_solve_time() {
        let curve = vec![10.0, 5.0, 0.5, 0.05];
        assert_eq!(solve_index(&curve, 10.0, 0.0, 1e-2), Some(4));
        assert_eq!(solve_index(&curve, 10.0, 0.0, 1e-1), Some(3));
    }

    #[test]
    fn entry_configs() {
        let mut e = AlgorithmEntry::new("x");
        e.refine_freq = Some(0);
        e.rbf = "cubic".into();
        let (cfg, par) = e.configs().unwrap();
        assert!(cfg.refine.is_none());
        assert_eq!(cfg.model, ModelChoice::Fixed(RbfKind::cubic()));
        assert!(par.is_none());
        e.threads = Some(4);
        e.simulate_latency = Some("lognormal:3,0.5,300".into());
        assert_eq!(e.configs().unwrap().1.unwrap().workers, 4);
        e.algorithm = "nelder-mead".into();
        assert!(e.configs().is_err());
    }
}

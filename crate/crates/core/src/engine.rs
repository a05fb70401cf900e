//! Serial optimizer: initial design, cyclic search steps, periodic
//! refinement, restoration of unsolvable systems and restarts.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::design::{initial_design, initial_sample_count, InitConfig};
use crate::error::{Error, Result};
use crate::linalg::{solve_symmetric, SolveMethod};
use crate::modelsel::ModelSelState;
use crate::problem::{min_distance, ExtendedPoint, OriginalPoint, ProblemSpec, NODE_TOLERANCE};
use crate::rbf::{assemble_system, clip_values, fit, Interpolant, RbfKind};
use crate::refine::{should_trigger, RefineConfig, RefinementState, StopReason};
use crate::search::{next_point, Algorithm, CycleState, MsrsmVariant, SearchInput, Step, DEFAULT_KAPPA};
use crate::subsolver::{pointwise, Subsolver, UnitDomain};

/// Restarts allowed before a run is aborted.
pub const MAX_RESTARTS: usize = 3;

/// Kernel used for the surrogate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelChoice {
    /// Cross-validated choice at the start of every cycle.
    Auto,
    Fixed(RbfKind),
}

/// Simulated duration of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LatencyModel {
    Constant(f64),
    /// `exp(N(mu, sigma^2))`, truncated at `cap`.
    LogNormal { mu: f64, sigma: f64, cap: f64 },
}

impl LatencyModel {
    /// Parses `lognormal:mu,sigma,cap` or `constant:t`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad latency model `{text}`"));
        let (kind, args) = text.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let model = match (kind, nums.as_slice()) {
            ("lognormal", &[mu, sigma, cap]) if sigma >= 0.0 && cap > 0.0 => Self::LogNormal { mu, sigma, cap },
            ("constant", &[t]) if t >= 0.0 => Self::Constant(t),
            _ => return Err(bad()),
        };
        Ok(model)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Constant(t) => t,
            Self::LogNormal { mu, sigma, cap } => LogNormal::new(mu, sigma)
                .map(|d| d.sample(rng))
                .unwrap_or(cap)
                .min(cap),
        }
    }
}

/// Source of the `wall_clock` column and of the time limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClockMode {
    /// Elapsed real time.
    Real,
    /// Sum of simulated evaluation latencies; keeps traces reproducible.
    Simulated(LatencyModel),
}

impl Default for ClockMode {
    fn default() -> Self {
        Self::Simulated(LatencyModel::Constant(1.0))
    }
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub variant: MsrsmVariant,
    pub subsolver: Subsolver,
    /// Maximum number of evaluations; `None` means `50 (n + 1)`.
    pub budget: Option<usize>,
    pub wall_clock_limit: Option<f64>,
    pub seed: u64,
    pub model: ModelChoice,
    pub t_mcv: usize,
    /// `None` disables refinement.
    pub refine: Option<RefineConfig>,
    pub kappa: usize,
    /// `None` uses the algorithm default.
    pub infstep: Option<bool>,
    /// Replaces the generated initial design.
    pub initial_points: Option<Vec<OriginalPoint>>,
    pub clock: ClockMode,
    pub max_restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::default(),
            variant: MsrsmVariant::default(),
            subsolver: Subsolver::default(),
            budget: None,
            wall_clock_limit: None,
            seed: 0,
            model: ModelChoice::Auto,
            t_mcv: crate::modelsel::DEFAULT_T_MCV,
            refine: Some(RefineConfig::default()),
            kappa: DEFAULT_KAPPA,
            infstep: None,
            initial_points: None,
            clock: ClockMode::default(),
            max_restarts: MAX_RESTARTS,
        }
    }
}

/// `50 (n + 1)` with `n` the number of variables.
pub fn default_budget(spec: &ProblemSpec) -> usize {
    50 * (spec.n_vars() + 1)
}

impl OptimizerConfig {
    pub fn budget_for(&self, spec: &ProblemSpec) -> usize {
        self.budget.unwrap_or_else(|| default_budget(spec))
    }

    pub fn infstep_enabled(&self) -> bool {
        self.infstep.unwrap_or_else(|| self.algorithm.default_infstep())
    }

    fn validate(&self, spec: &ProblemSpec, n_init: usize) -> Result<()> {
        if self.kappa == 0 {
            return Err(Error::Config("kappa must be positive".into()));
        }
        if let Some(r) = &self.refine {
            r.validate()?;
        }
        let budget = self.budget_for(spec);
        if budget < n_init {
            return Err(Error::Config(format!(
                "budget {budget} is smaller than the initial design size {n_init}"
            )));
        }
        if let Some(points) = &self.initial_points {
            for p in points {
                spec.check_original(p)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Global,
    Local,
    InfStep,
    Refine,
    Restore,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Init => "init",
            Self::Global => "global",
            Self::Local => "local",
            Self::InfStep => "infstep",
            Self::Refine => "refine",
            Self::Restore => "restore",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Init, Self::Global, Self::Local, Self::InfStep, Self::Refine, Self::Restore]
            .into_iter()
            .find(|p| p.as_str() == s)
    }

    pub(crate) fn of_step(step: Step) -> Self {
        match step {
            Step::InfStep => Self::InfStep,
            Step::Global(_) => Self::Global,
            Step::Local => Self::Local,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub index: usize,
    pub phase: Phase,
    pub point: OriginalPoint,
    pub extended: ExtendedPoint,
    /// `+inf` for failed evaluations.
    pub f: f64,
    pub best: f64,
    pub wall_clock: f64,
}

/// Every evaluation in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvaluationTrace {
    pub records: Vec<TraceRecord>,
}

/// One CSV row read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub index: usize,
    pub phase: Phase,
    pub f: f64,
    pub best: f64,
    pub wall_clock: f64,
    pub point: Vec<f64>,
}

impl EvaluationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.best)
    }

    /// Appends a record, filling in index and best-so-far.
    pub fn push(&mut self, phase: Phase, point: OriginalPoint, extended: ExtendedPoint, f: f64, wall_clock: f64) {
        let best = self.best().min(f);
        self.records.push(TraceRecord {
            index: self.records.len() + 1,
            phase,
            point,
            extended,
            f,
            best,
            wall_clock,
        });
    }

    /// Best-so-far values, one per evaluation.
    pub fn best_curve(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.records.first().map_or(0, |r| r.point.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["index", "phase", "f", "best", "wall_clock"].map(String::from).to_vec();
        header.extend((0..n).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.index.to_string(),
                r.phase.as_str().to_string(),
                r.f.to_string(),
                r.best.to_string(),
                r.wall_clock.to_string(),
            ];
            row.extend(r.point.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Reads a trace CSV written by [`EvaluationTrace::write_csv`].
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidProblem(format!("bad trace field {i} in {}", path.display())))
        };
        rows.push(TraceRow {
            index: num(0)? as usize,
            phase: rec
                .get(1)
                .and_then(Phase::parse)
                .ok_or_else(|| Error::InvalidProblem("bad trace phase".into()))?,
            f: num(2)?,
            best: num(3)?,
            wall_clock: num(4)?,
            point: (5..rec.len()).map(num).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

/// Kernels chosen at the start of a cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelChoice {
    /// Evaluations done when the choice was made.
    pub evaluation: usize,
    pub local: String,
    pub global: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted,
}

/// Persisted outcome of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub best_point: Option<Vec<f64>>,
    pub best_value: Option<f64>,
    pub evaluations: usize,
    pub restarts: usize,
    pub kernel_history: Vec<KernelChoice>,
    pub status: RunStatus,
    pub wall_clock: f64,
}

impl RunSummary {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub best_point: Option<OriginalPoint>,
    /// `+inf` when no evaluation succeeded.
    pub best_value: f64,
    pub trace: EvaluationTrace,
    pub restarts: usize,
    pub kernel_history: Vec<KernelChoice>,
    pub status: RunStatus,
    pub refinement_phases: usize,
}

impl RunResult {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            best_point: self.best_value.is_finite().then(|| self.best_point.clone().map(|p| p.0)).flatten(),
            best_value: self.best_value.is_finite().then_some(self.best_value),
            evaluations: self.trace.len(),
            restarts: self.restarts,
            kernel_history: self.kernel_history.clone(),
            status: self.status,
            wall_clock: self.trace.records.last().map_or(0.0, |r| r.wall_clock),
        }
    }
}

/// Elapsed time under a [`ClockMode`].
#[derive(Clone, Debug)]
pub(crate) struct Clock {
    mode: ClockMode,
    start: Instant,
    virtual_time: f64,
    rng: ChaCha8Rng,
}

impl Clock {
    pub(crate) fn new(mode: ClockMode, seed: u64) -> Self {
        Self {
            mode,
            start: Instant::now(),
            virtual_time: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6c6174656e6379),
        }
    }

    pub(crate) fn now(&self) -> f64 {
        match self.mode {
            ClockMode::Real => self.start.elapsed().as_secs_f64(),
            ClockMode::Simulated(_) => self.virtual_time,
        }
    }

    /// Draws the duration of one evaluation.
    pub(crate) fn latency(&mut self) -> f64 {
        match self.mode {
            ClockMode::Real => 0.0,
            ClockMode::Simulated(m) => m.sample(&mut self.rng),
        }
    }

    /// Accounts for one serial evaluation and returns the time after it.
    pub(crate) fn charge(&mut self) -> f64 {
        let dt = self.latency();
        self.advance_to(self.virtual_time + dt);
        self.now()
    }

    pub(crate) fn advance_to(&mut self, t: f64) {
        self.virtual_time = self.virtual_time.max(t);
    }
}

/// Nodes with finite values, and those values clipped.
pub(crate) fn fit_data(nodes: &[Vec<f64>], values: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (pts, vals): (Vec<Vec<f64>>, Vec<f64>) = nodes
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(p, v)| (p.clone(), *v))
        .unzip();
    let clipped = clip_values(&vals);
    (pts, clipped)
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Whether the interpolation system for `nodes` is solvable directly
/// (condition estimate below the limit).
pub fn system_invertible(kind: RbfKind, nodes: &[Vec<f64>], eliminated: &[usize]) -> bool {
    let zeros = vec![0.0; nodes.len()];
    match assemble_system(kind, nodes, &zeros, eliminated) {
        Ok(sys) => solve_symmetric(&sys.matrix, &sys.rhs).method == SolveMethod::Direct,
        Err(_) => false,
    }
}

/// Searches, for `i` from the last node down to the first, a point far from
/// all other nodes whose swap for node `i` makes the system invertible.
/// Returns `(i, replacement)` on success. `occupied` lists every point the
/// replacement must differ from.
pub fn restoration_step<R: Rng + ?Sized>(
    kind: RbfKind,
    nodes: &[Vec<f64>],
    occupied: &[Vec<f64>],
    eliminated: &[usize],
    domain: &UnitDomain,
    subsolver: &Subsolver,
    rng: &mut R,
) -> Option<(usize, Vec<f64>)> {
    for i in (0..nodes.len()).rev() {
        let others: Vec<Vec<f64>> = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        if others.is_empty() {
            continue;
        }
        let best = subsolver.minimize(pointwise(|x| -min_distance(x, &others)), domain, rng);
        let candidate = best.point;
        let spread = min_distance(&candidate, &others);
        if spread < min_distance(&nodes[i], &others) || min_distance(&candidate, occupied) <= NODE_TOLERANCE {
            continue;
        }
        let mut swapped = nodes.to_vec();
        swapped[i] = candidate.clone();
        if system_invertible(kind, &swapped, eliminated) {
            return Some((i, candidate));
        }
    }
    None
}

/// State of one serial run.
struct Engine<'a> {
    spec: &'a ProblemSpec,
    cfg: &'a OptimizerConfig,
    domain: UnitDomain,
    eliminated: Vec<usize>,
    rng: ChaCha8Rng,
    clock: Clock,
    budget: usize,
    n_init: usize,
    trace: EvaluationTrace,
    /// Current interpolation set (unit coordinates) and raw values.
    nodes: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Every evaluated point and its value, across restarts.
    occupied: Vec<Vec<f64>>,
    occupied_values: Vec<f64>,
    best_unit: Option<Vec<f64>>,
    best_point: Option<OriginalPoint>,
    best_value: f64,
    cycle: CycleState,
    modelsel: ModelSelState,
    kernel_history: Vec<KernelChoice>,
    restarts: usize,
    refine_state: Option<RefinementState>,
    cycles_since_refine: usize,
    improved_since_refine: bool,
    refinement_phases: usize,
    aborted: bool,
}

impl<'a> Engine<'a> {
    fn done(&self) -> bool {
        self.aborted
            || self.trace.len() >= self.budget
            || self.cfg.wall_clock_limit.is_some_and(|t| self.clock.now() >= t)
    }

    fn evaluate(&mut self, unit: &[f64], phase: Phase) -> f64 {
        let ext = ExtendedPoint(self.spec.from_unit(unit));
        let orig = self.spec.decode(&ext).expect("search points are feasible");
        let mut f = self.spec.evaluate(&orig);
        if !f.is_finite() {
            f = f64::INFINITY;
        }
        let t = self.clock.charge();
        if f < self.best_value {
            self.best_value = f;
            self.best_unit = Some(unit.to_vec());
            self.best_point = Some(orig.clone());
            if phase != Phase::Refine {
                self.improved_since_refine = true;
            }
        }
        self.trace.push(phase, orig, ext, f, t);
        self.occupied.push(unit.to_vec());
        self.occupied_values.push(f);
        f
    }

    fn add_node(&mut self, unit: Vec<f64>, f: f64) {
        self.nodes.push(unit);
        self.values.push(f);
    }

    fn design(&mut self) -> Result<Vec<Vec<f64>>> {
        let design = initial_design(self.spec, self.n_init, true, &InitConfig::default(), &mut self.rng)?;
        Ok(design.iter().map(|x| self.spec.to_unit(x)).collect())
    }

    fn initial_step(&mut self) -> Result<()> {
        let points = match &self.cfg.initial_points {
            Some(pts) => pts
                .iter()
                .map(|p| Ok(self.spec.to_unit(&self.spec.encode(p)?)))
                .collect::<Result<Vec<_>>>()?,
            None => self.design()?,
        };
        for p in points {
            if self.done() {
                break;
            }
            if min_distance(&p, &self.nodes) <= NODE_TOLERANCE {
                continue;
            }
            let f = self.evaluate(&p, Phase::Init);
            self.add_node(p, f);
        }
        self.improved_since_refine = false;
        Ok(())
    }

    /// Fresh design around the incumbent. Returns false once the restart
    /// allowance is used up.
    fn restart(&mut self) -> bool {
        if self.restarts >= self.cfg.max_restarts {
            self.aborted = true;
            return false;
        }
        self.restarts += 1;
        let Ok(mut design) = self.design() else {
            self.aborted = true;
            return false;
        };
        let incumbent = self.best_unit.clone();
        if let Some(inc) = &incumbent {
            let nearest = (0..design.len())
                .min_by(|&a, &b| {
                    crate::problem::sq_dist(&design[a], inc).total_cmp(&crate::problem::sq_dist(&design[b], inc))
                })
                .expect("non-empty design");
            design[nearest] = inc.clone();
        }
        self.nodes.clear();
        self.values.clear();
        for p in design {
            if incumbent.as_ref() == Some(&p) {
                self.add_node(p, self.best_value);
                continue;
            }
            if self.done() {
                break;
            }
            if let Some(i) = self
                .occupied
                .iter()
                .position(|q| crate::problem::sq_dist(q, &p) <= NODE_TOLERANCE * NODE_TOLERANCE)
            {
                let f = self.occupied_values[i];
                if min_distance(&p, &self.nodes) > NODE_TOLERANCE {
                    self.add_node(p, f);
                }
                continue;
            }
            let f = self.evaluate(&p, Phase::Init);
            self.add_node(p, f);
        }
        self.cycle.reset();
        self.refine_state = None;
        self.cycles_since_refine = 0;
        self.improved_since_refine = false;
        true
    }

    /// Swaps one node for a far-away point and evaluates it.
    fn restore(&mut self, kind: RbfKind) -> bool {
        let finite: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.values[i].is_finite()).collect();
        let pts: Vec<Vec<f64>> = finite.iter().map(|&i| self.nodes[i].clone()).collect();
        let found = restoration_step(
            kind,
            &pts,
            &self.occupied,
            &self.eliminated,
            &self.domain,
            &self.cfg.subsolver,
            &mut self.rng,
        );
        let Some((i, x)) = found else {
            return false;
        };
        let f = self.evaluate(&x, Phase::Restore);
        self.nodes[finite[i]] = x;
        self.values[finite[i]] = f;
        true
    }

    fn choose_models(&mut self) -> (RbfKind, RbfKind) {
        let (local, global) = match self.cfg.model {
            ModelChoice::Fixed(k) => (k, k),
            ModelChoice::Auto => {
                let (pts, vals) = fit_data(&self.nodes, &self.values);
                self.modelsel.choose_models(&pts, &vals, &self.eliminated)
            }
        };
        self.kernel_history.push(KernelChoice {
            evaluation: self.trace.len(),
            local: local.name().to_string(),
            global: global.name().to_string(),
        });
        (local, global)
    }

    fn refinement_phase(&mut self, rcfg: &RefineConfig) {
        let resumable = !self.improved_since_refine
            && self
                .refine_state
                .as_ref()
                .is_some_and(|s| s.stop_reason == Some(StopReason::IterationLimit));
        let mut state = if resumable {
            let mut s = self.refine_state.take().expect("checked");
            s.resume();
            s
        } else {
            let (pts, _) = fit_data(&self.nodes, &self.values);
            let raw: Vec<f64> = self.values.iter().copied().filter(|v| v.is_finite()).collect();
            match RefinementState::init(&pts, &raw, &self.domain, rcfg) {
                Some(s) => s,
                None => return,
            }
        };
        self.refinement_phases += 1;
        let cap = (rcfg.t_rs + 1) * (self.domain.dim + 2);
        let extra_margin = self.spec.n_vars() + 1;
        for _ in 0..cap {
            if self.done() {
                break;
            }
            state.allow_extra_iterations = self.budget - self.trace.len() <= extra_margin;
            let Some((p, _)) = state.propose(&self.domain, rcfg, &mut self.rng) else {
                break;
            };
            let known = self
                .occupied
                .iter()
                .position(|q| crate::problem::sq_dist(q, &p) <= NODE_TOLERANCE * NODE_TOLERANCE);
            let f = match known {
                Some(i) => self.occupied_values[i],
                None => {
                    let f = self.evaluate(&p, Phase::Refine);
                    self.add_node(p.clone(), f);
                    f
                }
            };
            state.observe(&p, f, rcfg);
        }
        self.refine_state = Some(state);
    }

    fn iterate(&mut self) {
        let mut cycle_start = true;
        let (mut local, mut global) = (RbfKind::thin_plate_spline(), RbfKind::thin_plate_spline());
        while !self.done() {
            if cycle_start {
                cycle_start = false;
                if let Some(rcfg) = self.cfg.refine {
                    let last_hit_limit = self
                        .refine_state
                        .as_ref()
                        .is_some_and(|s| s.stop_reason == Some(StopReason::IterationLimit));
                    if should_trigger(self.cycles_since_refine, self.improved_since_refine, last_hit_limit, &rcfg) {
                        self.refinement_phase(&rcfg);
                        self.cycles_since_refine = 0;
                        self.improved_since_refine = false;
                        if self.done() {
                            break;
                        }
                    }
                }
                (local, global) = self.choose_models();
            }
            let kind = if self.cycle.uses_local_model() { local } else { global };
            let (pts, vals) = fit_data(&self.nodes, &self.values);
            let mut fitted = fit(kind, &pts, &vals, &self.eliminated);
            let default_kind = RbfKind::thin_plate_spline();
            if fitted.is_err() && self.cfg.model == ModelChoice::Auto && kind != default_kind {
                // A selected kernel can turn ill-conditioned as nodes
                // accumulate; node swaps cannot cure that.
                fitted = fit(default_kind, &pts, &vals, &self.eliminated);
            }
            let model: Interpolant = match fitted {
                Ok(m) => m,
                Err(_) => {
                    let kind = if self.cfg.model == ModelChoice::Auto { default_kind } else { kind };
                    if !self.restore(kind) && !self.restart() {
                        break;
                    }
                    continue;
                }
            };
            let (f_min, f_max) = min_max(&vals);
            let input = SearchInput {
                algorithm: self.cfg.algorithm,
                variant: self.cfg.variant,
                cycle: &self.cycle,
                model: &model,
                nodes: &self.occupied,
                f_min,
                f_max,
                domain: &self.domain,
                subsolver: &self.cfg.subsolver,
            };
            match next_point(&input, &mut self.rng) {
                Ok(p) => {
                    let phase = Phase::of_step(self.cycle.current());
                    let f = self.evaluate(&p.point, phase);
                    self.add_node(p.point, f);
                }
                Err(_) => {
                    if !self.restart() {
                        break;
                    }
                    continue;
                }
            }
            if self.cycle.advance() {
                self.cycles_since_refine += 1;
                cycle_start = true;
            }
        }
    }
}

/// Runs the serial optimizer.
pub fn run(spec: &ProblemSpec, config: &OptimizerConfig) -> Result<RunResult> {
    let n_init = match &config.initial_points {
        Some(p) => p.len(),
        None => initial_sample_count(spec.dim(), 1),
    };
    config.validate(spec, n_init)?;
    let mut engine = Engine {
        spec,
        cfg: config,
        domain: UnitDomain::new(spec),
        eliminated: spec.layout().eliminated_columns(),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        clock: Clock::new(config.clock, config.seed),
        budget: config.budget_for(spec),
        n_init,
        trace: EvaluationTrace::default(),
        nodes: Vec::new(),
        values: Vec::new(),
        occupied: Vec::new(),
        occupied_values: Vec::new(),
        best_unit: None,
        best_point: None,
        best_value: f64::INFINITY,
        cycle: CycleState::new(config.kappa, config.infstep_enabled()),
        modelsel: ModelSelState::new(config.t_mcv),
        kernel_history: Vec::new(),
        restarts: 0,
        refine_state: None,
        cycles_since_refine: 0,
        improved_since_refine: false,
        refinement_phases: 0,
        aborted: false,
    };
    engine.initial_step()?;
    engine.iterate();
    Ok(RunResult {
        best_point: engine.best_point,
        best_value: engine.best_value,
        trace: engine.trace,
        restarts: engine.restarts,
        kernel_history: engine.kernel_history,
        status: if engine.aborted {
            RunStatus::Aborted
        } else {
            RunStatus::Completed
        },
        refinement_phases: engine.refinement_phases,
    })
}

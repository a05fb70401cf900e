//! Asynchronous master-worker optimizer.
//!
//! The master owns all optimizer state. Workers only evaluate the
//! objective: Type 1 tasks. Point selection (Type 2 tasks) runs on the
//! master between completions, so under the simulated executor it takes no
//! virtual time. A point that is being evaluated enters the surrogate as a
//! temporary node whose value is `max(f_min, s(x))`, which keeps the search
//! away from it until its true value arrives.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{initial_design, initial_sample_count, InitConfig};
use crate::engine::{
    fit_data, min_max, run, EvaluationTrace, KernelChoice, LatencyModel, ModelChoice, OptimizerConfig, Phase,
    RunResult, RunStatus,
};
use crate::error::{Error, Result};
use crate::modelsel::ModelSelState;
use crate::problem::{min_distance, sq_dist, ExtendedPoint, Objective, OriginalPoint, ProblemSpec, NODE_TOLERANCE};
use crate::rbf::{fit, RbfKind};
use crate::refine::{should_trigger, RefinementState, StopReason};
use crate::search::{next_point, CycleState, SearchInput};
use crate::subsolver::UnitDomain;

/// Default cap on the share of evaluations spent on refinement.
pub const DEFAULT_REFINE_FRACTION: f64 = 0.25;

/// Value of a temporary interpolation node.
pub fn make_temporary_value(f_min: f64, s_value: f64) -> f64 {
    f_min.max(s_value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    /// Type 1: evaluate the objective.
    EvalF,
    /// Type 2: compute the next point.
    ComputePoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub kind: TaskKind,
    /// Unit-scaled extended point for `EvalF` tasks.
    pub point: Option<Vec<f64>>,
    pub submit_order: u64,
    pub refinement: bool,
    pub phase: Phase,
}

/// Pending tasks. Type 1 before Type 2, first come first served within a
/// type.
#[derive(Clone, Debug, Default)]
pub struct TaskQueue {
    pending: Vec<Task>,
    next_order: u64,
}

impl TaskQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Enqueues a task and returns its submit order.
    pub fn push(&mut self, kind: TaskKind, point: Option<Vec<f64>>, refinement: bool, phase: Phase) -> u64 {
        let order = self.next_order;
        self.next_order += 1;
        self.pending.push(Task {
            kind,
            point,
            submit_order: order,
            refinement,
            phase,
        });
        order
    }

    /// Removes the task a worker should run next. The dedicated refinement
    /// worker only takes refinement tasks.
    pub fn next_task(&mut self, refinement_worker: bool) -> Option<Task> {
        let rank = |t: &Task| (t.kind != TaskKind::EvalF, t.submit_order);
        let i = self
            .pending
            .iter()
            .enumerate()
            .filter(|(_, t)| !refinement_worker || t.refinement)
            .min_by_key(|(_, t)| rank(t))
            .map(|(i, _)| i)?;
        Some(self.pending.remove(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExecutorKind {
    /// One OS thread per worker; wall clock is real time.
    Threads,
    /// Discrete-event simulation with sampled evaluation latencies.
    Simulated(LatencyModel),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelConfig {
    pub workers: usize,
    pub executor: ExecutorKind,
    pub refine_fraction: f64,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        Self {
            workers: 4,
            executor: ExecutorKind::Simulated(LatencyModel::LogNormal {
                mu: 3.0,
                sigma: 0.5,
                cap: 300.0,
            }),
            refine_fraction: DEFAULT_REFINE_FRACTION,
        }
    }
}

/// Counters checked by the tests.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParallelStats {
    /// Submissions of a point already evaluated or in flight.
    pub duplicate_evaluations: usize,
    pub max_in_flight: usize,
    /// Times the number of temporary nodes differed from the number of
    /// search evaluations in flight.
    pub accounting_violations: usize,
    pub refinement_evaluations: usize,
    pub point_tasks: usize,
    pub crashed_evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct ParallelResult {
    pub run: RunResult,
    pub stats: ParallelStats,
}

/// A finished evaluation.
#[derive(Clone, Debug)]
struct Completion {
    id: u64,
    worker: usize,
    f: f64,
    crashed: bool,
    time: f64,
}

fn call_objective(objective: &Objective, x: &[f64]) -> (f64, bool) {
    match catch_unwind(AssertUnwindSafe(|| objective(x))) {
        Ok(f) => (f, false),
        Err(_) => (f64::NAN, true),
    }
}

trait Executor {
    fn submit(&mut self, id: u64, worker: usize, point: &OriginalPoint);
    /// Blocks until the next evaluation finishes.
    fn next(&mut self) -> Option<Completion>;
    fn now(&self) -> f64;
}

#[derive(Debug)]
struct Event(Completion, u64);

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap and we pop the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.time.total_cmp(&self.0.time).then(other.1.cmp(&self.1))
    }
}

/// Virtual-time executor. The objective runs at submission; the result is
/// released when the sampled latency has elapsed.
struct SimulatedExecutor {
    objective: Objective,
    latency: LatencyModel,
    rng: ChaCha8Rng,
    now: f64,
    seq: u64,
    events: BinaryHeap<Event>,
}

impl Executor for SimulatedExecutor {
    fn submit(&mut self, id: u64, worker: usize, point: &OriginalPoint) {
        let (f, crashed) = call_objective(&self.objective, point);
        let time = self.now + self.latency.sample(&mut self.rng);
        self.seq += 1;
        self.events.push(Event(
            Completion {
                id,
                worker,
                f,
                crashed,
                time,
            },
            self.seq,
        ));
    }

    fn next(&mut self) -> Option<Completion> {
        let Event(c, _) = self.events.pop()?;
        self.now = self.now.max(c.time);
        Some(c)
    }

    fn now(&self) -> f64 {
        self.now
    }
}

/// One thread per worker, fed through its own channel.
struct ThreadExecutor {
    senders: Vec<mpsc::Sender<(u64, Vec<f64>)>>,
    done: mpsc::Receiver<Completion>,
    handles: Vec<thread::JoinHandle<()>>,
    in_flight: usize,
    start: Instant,
}

impl ThreadExecutor {
    fn new(objective: Objective, workers: usize) -> Self {
        let (done_tx, done) = mpsc::channel();
        let start = Instant::now();
        let mut senders = Vec::new();
        let mut handles = Vec::new();
        for worker in 0..workers {
            let (tx, rx) = mpsc::channel::<(u64, Vec<f64>)>();
            let done_tx = done_tx.clone();
            let objective = objective.clone();
            handles.push(thread::spawn(move || {
                for (id, x) in rx {
                    let (f, crashed) = call_objective(&objective, &x);
                    let time = start.elapsed().as_secs_f64();
                    if done_tx
                        .send(Completion {
                            id,
                            worker,
                            f,
                            crashed,
                            time,
                        })
                        .is_err()
                    {
                        break;
                    }
                }
            }));
            senders.push(tx);
        }
        Self {
            senders,
            done,
            handles,
            in_flight: 0,
            start,
        }
    }
}

impl Executor for ThreadExecutor {
    fn submit(&mut self, id: u64, worker: usize, point: &OriginalPoint) {
        self.in_flight += 1;
        self.senders[worker]
            .send((id, point.0.clone()))
            .expect("worker thread alive");
    }

    fn next(&mut self) -> Option<Completion> {
        if self.in_flight == 0 {
            return None;
        }
        let c = self.done.recv().ok()?;
        self.in_flight -= 1;
        Some(c)
    }

    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

impl Drop for ThreadExecutor {
    fn drop(&mut self) {
        self.senders.clear();
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

/// An evaluation that has been handed to a worker.
#[derive(Clone, Debug)]
struct InFlight {
    unit: Vec<f64>,
    phase: Phase,
    refinement: bool,
    attempts: usize,
}

struct Master<'a> {
    spec: &'a ProblemSpec,
    cfg: &'a OptimizerConfig,
    pcfg: &'a ParallelConfig,
    domain: UnitDomain,
    eliminated: Vec<usize>,
    rng: ChaCha8Rng,
    exec: Box<dyn Executor>,
    budget: usize,
    queue: TaskQueue,
    idle: Vec<bool>,
    refine_worker: Option<usize>,
    in_flight: HashMap<u64, InFlight>,
    /// Temporary nodes keyed by the evaluation they wait for.
    temporaries: HashMap<u64, (Vec<f64>, f64)>,
    submitted: usize,
    trace: EvaluationTrace,
    nodes: Vec<Vec<f64>>,
    values: Vec<f64>,
    occupied: Vec<Vec<f64>>,
    occupied_values: Vec<f64>,
    best_value: f64,
    best_point: Option<OriginalPoint>,
    best_unit: Option<Vec<f64>>,
    cycle: CycleState,
    modelsel: ModelSelState,
    kinds: (RbfKind, RbfKind),
    kernel_history: Vec<KernelChoice>,
    restarts: usize,
    aborted: bool,
    refine_state: Option<RefinementState>,
    cycles_since_refine: usize,
    improved_since_refine: bool,
    refinement_phases: usize,
    stats: ParallelStats,
}

impl<'a> Master<'a> {
    fn out_of_time(&self) -> bool {
        self.cfg.wall_clock_limit.is_some_and(|t| self.exec.now() >= t)
    }

    fn can_submit(&self) -> bool {
        !self.aborted && self.submitted < self.budget && !self.out_of_time()
    }

    fn search_workers_idle(&self) -> Option<usize> {
        (0..self.idle.len()).find(|&w| self.idle[w] && Some(w) != self.refine_worker)
    }

    fn is_known(&self, x: &[f64]) -> Option<usize> {
        self.occupied
            .iter()
            .position(|q| sq_dist(q, x) <= NODE_TOLERANCE * NODE_TOLERANCE)
    }

    fn busy_points(&self) -> Vec<Vec<f64>> {
        self.in_flight.values().map(|t| t.unit.clone()).collect()
    }

    /// Queues an evaluation and hands queued tasks to idle workers.
    fn enqueue_eval(&mut self, unit: Vec<f64>, phase: Phase, refinement: bool) -> u64 {
        if self.is_known(&unit).is_some() || min_distance(&unit, &self.busy_points()) <= NODE_TOLERANCE {
            self.stats.duplicate_evaluations += 1;
        }
        self.submitted += 1;
        self.queue.push(TaskKind::EvalF, Some(unit), refinement, phase)
    }

    fn dispatch(&mut self) {
        for w in 0..self.idle.len() {
            if !self.idle[w] {
                continue;
            }
            let Some(task) = self.queue.next_task(Some(w) == self.refine_worker) else {
                continue;
            };
            let unit = task.point.expect("evaluation tasks carry a point");
            let orig = self
                .spec
                .decode(&ExtendedPoint(self.spec.from_unit(&unit)))
                .expect("feasible point");
            self.exec.submit(task.submit_order, w, &orig);
            self.idle[w] = false;
            self.in_flight.insert(
                task.submit_order,
                InFlight {
                    unit,
                    phase: task.phase,
                    refinement: task.refinement,
                    attempts: 1,
                },
            );
        }
        self.stats.max_in_flight = self.stats.max_in_flight.max(self.in_flight.len());
        let searching = self.in_flight.values().filter(|t| t.phase != Phase::Init && !t.refinement).count()
            + self.queue.pending.iter().filter(|t| t.phase != Phase::Init && !t.refinement).count();
        if searching != self.temporaries.len() {
            self.stats.accounting_violations += 1;
        }
    }

    /// Waits for one evaluation and records it. Returns false when nothing
    /// was in flight.
    fn complete_one(&mut self) -> bool {
        let Some(c) = self.exec.next() else {
            return false;
        };
        self.idle[c.worker] = true;
        let mut task = self.in_flight.remove(&c.id).expect("known task");
        if c.crashed {
            self.stats.crashed_evaluations += 1;
            if task.attempts < 2 {
                task.attempts += 1;
                let orig = self
                    .spec
                    .decode(&ExtendedPoint(self.spec.from_unit(&task.unit)))
                    .expect("feasible point");
                self.exec.submit(c.id, c.worker, &orig);
                self.idle[c.worker] = false;
                self.in_flight.insert(c.id, task);
                return true;
            }
        }
        let f = if c.f.is_finite() { c.f } else { f64::INFINITY };
        let ext = ExtendedPoint(self.spec.from_unit(&task.unit));
        let orig = self.spec.decode(&ext).expect("feasible point");
        if f < self.best_value {
            self.best_value = f;
            self.best_point = Some(orig.clone());
            self.best_unit = Some(task.unit.clone());
            if !task.refinement {
                self.improved_since_refine = true;
            }
        }
        self.trace.push(task.phase, orig, ext, f, c.time);
        self.temporaries.remove(&c.id);
        self.occupied.push(task.unit.clone());
        self.occupied_values.push(f);
        self.nodes.push(task.unit.clone());
        self.values.push(f);
        if task.refinement {
            if let (Some(state), Some(rcfg)) = (self.refine_state.as_mut(), self.cfg.refine.as_ref()) {
                state.observe(&task.unit, f, rcfg);
            }
        }
        true
    }

    fn drain(&mut self) {
        while !self.in_flight.is_empty() || !self.queue.is_empty() {
            self.dispatch();
            if !self.complete_one() {
                break;
            }
        }
    }

    fn design(&mut self) -> Result<Vec<Vec<f64>>> {
        let n_init = initial_sample_count(self.spec.dim(), self.pcfg.workers);
        let init = InitConfig {
            threads: self.pcfg.workers,
            ..InitConfig::default()
        };
        let design = initial_design(self.spec, n_init, true, &init, &mut self.rng)?;
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
            if self.can_submit() && self.is_known(&p).is_none() && min_distance(&p, &self.busy_points()) > NODE_TOLERANCE {
                self.enqueue_eval(p, Phase::Init, false);
                self.dispatch();
            }
        }
        self.drain();
        self.improved_since_refine = false;
        Ok(())
    }

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
                .min_by(|&a, &b| sq_dist(&design[a], inc).total_cmp(&sq_dist(&design[b], inc)))
                .expect("non-empty design");
            design[nearest] = inc.clone();
        }
        self.nodes.clear();
        self.values.clear();
        for p in design {
            if let Some(i) = self.is_known(&p) {
                if min_distance(&p, &self.nodes) > NODE_TOLERANCE {
                    self.nodes.push(p);
                    self.values.push(self.occupied_values[i]);
                }
                continue;
            }
            if self.can_submit() {
                self.enqueue_eval(p, Phase::Init, false);
                self.dispatch();
            }
        }
        self.drain();
        self.cycle.reset();
        self.refine_state = None;
        self.cycles_since_refine = 0;
        self.improved_since_refine = false;
        true
    }

    fn choose_models(&mut self) {
        self.kinds = match self.cfg.model {
            ModelChoice::Fixed(k) => (k, k),
            ModelChoice::Auto => {
                let (pts, vals) = fit_data(&self.nodes, &self.values);
                self.modelsel.choose_models(&pts, &vals, &self.eliminated)
            }
        };
        self.kernel_history.push(KernelChoice {
            evaluation: self.trace.len(),
            local: self.kinds.0.name().to_string(),
            global: self.kinds.1.name().to_string(),
        });
    }

    /// Runs a Type 2 task: selects a point and queues its evaluation with a
    /// temporary node. Returns false when no model could be built.
    fn compute_point(&mut self) -> bool {
        self.stats.point_tasks += 1;
        let kind = if self.cycle.uses_local_model() {
            self.kinds.0
        } else {
            self.kinds.1
        };
        let (true_pts, true_vals) = fit_data(&self.nodes, &self.values);
        let f_min = true_vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut pts = true_pts;
        let mut raw: Vec<f64> = self.values.iter().copied().filter(|v| v.is_finite()).collect();
        let mut temp_ids: Vec<&u64> = self.temporaries.keys().collect();
        temp_ids.sort();
        for id in temp_ids {
            let (p, v) = &self.temporaries[id];
            pts.push(p.clone());
            raw.push(*v);
        }
        let vals = crate::rbf::clip_values(&raw);
        let mut fitted = fit(kind, &pts, &vals, &self.eliminated);
        let default_kind = RbfKind::thin_plate_spline();
        if fitted.is_err() && self.cfg.model == ModelChoice::Auto && kind != default_kind {
            fitted = fit(default_kind, &pts, &vals, &self.eliminated);
        }
        let Ok(model) = fitted else {
            return false;
        };
        let mut occupied = self.occupied.clone();
        occupied.extend(self.busy_points());
        occupied.extend(self.queue.pending.iter().filter_map(|t| t.point.clone()));
        let (_, f_max) = min_max(&vals);
        let input = SearchInput {
            algorithm: self.cfg.algorithm,
            variant: self.cfg.variant,
            cycle: &self.cycle,
            model: &model,
            nodes: &occupied,
            f_min,
            f_max,
            domain: &self.domain,
            subsolver: &self.cfg.subsolver,
        };
        let Ok(p) = next_point(&input, &mut self.rng) else {
            return false;
        };
        let phase = Phase::of_step(self.cycle.current());
        let temp = make_temporary_value(f_min, model.predict(&p.point));
        let id = self.enqueue_eval(p.point.clone(), phase, false);
        self.temporaries.insert(id, (p.point, temp));
        if self.cycle.advance() {
            self.cycles_since_refine += 1;
        }
        true
    }

    /// Keeps the dedicated worker busy with refinement evaluations.
    fn feed_refinement(&mut self) {
        let (Some(w), Some(rcfg)) = (self.refine_worker, self.cfg.refine) else {
            return;
        };
        if !self.idle[w] || self.in_flight.values().any(|t| t.refinement) {
            return;
        }
        let active = self.refine_state.as_ref().is_some_and(|s| s.is_active());
        if active && self.improved_since_refine {
            self.refine_state = None;
        }
        let active = self.refine_state.as_ref().is_some_and(|s| s.is_active());
        if !active {
            let hit_limit = self
                .refine_state
                .as_ref()
                .is_some_and(|s| s.stop_reason == Some(StopReason::IterationLimit));
            if !should_trigger(self.cycles_since_refine, self.improved_since_refine, hit_limit, &rcfg) {
                return;
            }
            if hit_limit && !self.improved_since_refine {
                self.refine_state.as_mut().expect("checked").resume();
            } else {
                let (pts, _) = fit_data(&self.nodes, &self.values);
                let raw: Vec<f64> = self.values.iter().copied().filter(|v| v.is_finite()).collect();
                self.refine_state = RefinementState::init(&pts, &raw, &self.domain, &rcfg);
            }
            self.refinement_phases += 1;
            self.cycles_since_refine = 0;
            self.improved_since_refine = false;
        }
        loop {
            if !self.can_submit() {
                return;
            }
            let cap = self.pcfg.refine_fraction * (self.submitted + 1) as f64;
            if (self.stats.refinement_evaluations + 1) as f64 > cap {
                return;
            }
            let margin = self.spec.n_vars() + 1;
            let remaining = self.budget - self.submitted;
            let Some(state) = self.refine_state.as_mut() else {
                return;
            };
            state.allow_extra_iterations = remaining <= margin;
            let Some((p, _)) = state.propose(&self.domain, &rcfg, &mut self.rng) else {
                return;
            };
            if let Some(i) = self.is_known(&p) {
                let f = self.occupied_values[i];
                self.refine_state.as_mut().expect("set").observe(&p, f, &rcfg);
                continue;
            }
            let busy = self.busy_points();
            if min_distance(&p, &busy) <= NODE_TOLERANCE {
                // Being evaluated by a search worker; try again later.
                self.refine_state = None;
                return;
            }
            self.stats.refinement_evaluations += 1;
            self.enqueue_eval(p, Phase::Refine, true);
            return;
        }
    }

    fn iterate(&mut self) {
        self.choose_models();
        let mut models_for_cycle = true;
        loop {
            self.feed_refinement();
            while self.can_submit() && self.search_workers_idle().is_some() {
                if self.cycle.is_cycle_start() {
                    if !models_for_cycle {
                        self.choose_models();
                    }
                    models_for_cycle = false;
                }
                if !self.compute_point() {
                    break;
                }
                self.dispatch();
            }
            self.dispatch();
            if self.in_flight.is_empty() {
                if !self.can_submit() {
                    break;
                }
                // Nothing in flight and no point could be produced.
                if self.search_workers_idle().is_some() && !self.restart() {
                    break;
                }
                models_for_cycle = false;
                continue;
            }
            self.complete_one();
        }
        self.drain();
    }
}

/// Runs the asynchronous optimizer with `pcfg.workers` workers. Fewer than
/// two workers fall back to the serial engine.
pub fn run_parallel(spec: &ProblemSpec, cfg: &OptimizerConfig, pcfg: &ParallelConfig) -> Result<ParallelResult> {
    if pcfg.workers < 2 {
        return Ok(ParallelResult {
            run: run(spec, cfg)?,
            stats: ParallelStats::default(),
        });
    }
    if !(0.0..=1.0).contains(&pcfg.refine_fraction) {
        return Err(Error::Config("refinement fraction must lie in [0, 1]".into()));
    }
    let n_init = match &cfg.initial_points {
        Some(p) => p.len(),
        None => initial_sample_count(spec.dim(), pcfg.workers),
    };
    let budget = cfg.budget_for(spec);
    if budget < n_init {
        return Err(Error::Config(format!(
            "budget {budget} is smaller than the initial design size {n_init}"
        )));
    }
    if let Some(r) = &cfg.refine {
        r.validate()?;
    }
    let exec: Box<dyn Executor> = match pcfg.executor {
        ExecutorKind::Simulated(latency) => Box::new(SimulatedExecutor {
            objective: spec.objective().clone(),
            latency,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6c6174656e6379),
            now: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
        }),
        ExecutorKind::Threads => {
            if !spec.is_thread_safe() {
                return Err(Error::Config("objective is not declared thread-safe".into()));
            }
            Box::new(ThreadExecutor::new(spec.objective().clone(), pcfg.workers))
        }
    };
    let mut m = Master {
        spec,
        cfg,
        pcfg,
        domain: UnitDomain::new(spec),
        eliminated: spec.layout().eliminated_columns(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        exec,
        budget,
        queue: TaskQueue::new(),
        idle: vec![true; pcfg.workers],
        refine_worker: cfg.refine.is_some().then_some(0),
        in_flight: HashMap::new(),
        temporaries: HashMap::new(),
        submitted: 0,
        trace: EvaluationTrace::default(),
        nodes: Vec::new(),
        values: Vec::new(),
        occupied: Vec::new(),
        occupied_values: Vec::new(),
        best_value: f64::INFINITY,
        best_point: None,
        best_unit: None,
        cycle: CycleState::new(cfg.kappa, cfg.infstep_enabled()),
        modelsel: ModelSelState::new(cfg.t_mcv),
        kinds: (RbfKind::thin_plate_spline(), RbfKind::thin_plate_spline()),
        kernel_history: Vec::new(),
        restarts: 0,
        aborted: false,
        refine_state: None,
        cycles_since_refine: 0,
        improved_since_refine: false,
        refinement_phases: 0,
        stats: ParallelStats::default(),
    };
    // The design may use every worker, the refinement one included.
    let refine_worker = m.refine_worker.take();
    m.initial_step()?;
    m.refine_worker = refine_worker;
    m.iterate();
    let status = if m.aborted {
        RunStatus::Aborted
    } else {
        RunStatus::Completed
    };
    Ok(ParallelResult {
        run: RunResult {
            best_point: m.best_point,
            best_value: m.best_value,
            trace: m.trace,
            restarts: m.restarts,
            kernel_history: m.kernel_history,
            status,
            refinement_phases: m.refinement_phases,
        },
        stats: m.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branin() -> ProblemSpec {
        crate::testbed::builtin("branin").unwrap().spec
    }

    #[test]
    fn temporary_values() {
        assert_eq!(make_temporary_value(3.0, 5.0), 5.0);
        assert_eq!(make_temporary_value(3.0, 1.0), 3.0);
        assert_eq!(make_temporary_value(2.5, 2.5), 2.5);
    }

    #[test]
    fn queue_priorities() {
        let mut q = TaskQueue::new();
        q.push(TaskKind::ComputePoint, None, false, Phase::Global);
        q.push(TaskKind::EvalF, Some(vec![0.0]), false, Phase::Global);
        let t = q.next_task(false).unwrap();
        assert_eq!((t.kind, t.submit_order), (TaskKind::EvalF, 1));

        let mut q = TaskQueue::new();
        q.push(TaskKind::EvalF, Some(vec![0.0]), false, Phase::Global);
        q.push(TaskKind::EvalF, Some(vec![1.0]), false, Phase::Global);
        assert_eq!(q.next_task(false).unwrap().submit_order, 0);

        assert!(TaskQueue::new().next_task(false).is_none());
    }

    #[test]
    fn refinement_worker_takes_only_refinement_tasks() {
        let mut q = TaskQueue::new();
        q.push(TaskKind::EvalF, Some(vec![0.0]), false, Phase::Global);
        assert!(q.next_task(true).is_none());
        q.push(TaskKind::EvalF, Some(vec![0.5]), true, Phase::Refine);
        assert_eq!(q.next_task(true).unwrap().submit_order, 1);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn simulated_runs_are_deterministic() {
        let cfg = OptimizerConfig {
            budget: Some(40),
            seed: 9,
            ..Default::default()
        };
        let p = ParallelConfig::default();
        let a = run_parallel(&branin(), &cfg, &p).unwrap();
        let b = run_parallel(&branin(), &cfg, &p).unwrap();
        assert_eq!(a.run.trace.to_csv_string(), b.run.trace.to_csv_string());
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.run.trace.len(), 40);
    }

    #[test]
    fn invariants_hold() {
        let cfg = OptimizerConfig {
            budget: Some(60),
            seed: 2,
            ..Default::default()
        };
        let r = run_parallel(&branin(), &cfg, &ParallelConfig::default()).unwrap();
        assert_eq!(r.stats.duplicate_evaluations, 0);
        assert_eq!(r.stats.accounting_violations, 0);
        assert!(r.stats.max_in_flight <= 4);
        assert!(r.stats.refinement_evaluations as f64 <= 0.25 * 60.0 + 1.0);
        let true_best = r.run.trace.records.iter().map(|x| x.f).fold(f64::INFINITY, f64::min);
        assert_eq!(r.run.best_value, true_best);
        let times: Vec<f64> = r.run.trace.records.iter().map(|x| x.wall_clock).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn threads_complete_the_budget() {
        let cfg = OptimizerConfig {
            budget: Some(25),
            seed: 1,
            ..Default::default()
        };
        let p = ParallelConfig {
            workers: 3,
            executor: ExecutorKind::Threads,
            ..Default::default()
        };
        let r = run_parallel(&branin(), &cfg, &p).unwrap();
        assert_eq!(r.run.trace.len(), 25);
        assert_eq!(r.stats.duplicate_evaluations, 0);
    }

    #[test]
    fn crashing_objective_is_retried_then_recorded() {
        let spec = ProblemSpec::builder()
            .continuous(0.0, 1.0)
            .continuous(0.0, 1.0)
            .objective(|x| {
                if x[0] > 0.9 {
                    panic!("simulator crashed");
                }
                x[0] + x[1]
            })
            .thread_safe(true)
            .build()
            .unwrap();
        let cfg = OptimizerConfig {
            budget: Some(30),
            seed: 3,
            ..Default::default()
        };
        let r = run_parallel(&spec, &cfg, &ParallelConfig::default()).unwrap();
        assert_eq!(r.run.trace.len(), 30);
        for rec in &r.run.trace.records {
            if rec.point[0] > 0.9 {
                assert_eq!(rec.f, f64::INFINITY);
            }
        }
    }

    #[test]
    fn one_worker_is_serial() {
        let cfg = OptimizerConfig {
            budget: Some(20),
            seed: 5,
            ..Default::default()
        };
        let p = ParallelConfig {
            workers: 1,
            ..Default::default()
        };
        let a = run_parallel(&branin(), &cfg, &p).unwrap();
        let b = run(&branin(), &cfg).unwrap();
        assert_eq!(a.run.trace, b.trace);
    }
}

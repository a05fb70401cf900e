//! Heuristic minimizers for the auxiliary search problems.
//!
//! Both work on the unit-scaled extended space described by [`UnitDomain`]
//! and take a population-level objective, so that scores normalized over
//! the current candidate set (as in the metric stochastic response surface
//! score) can be computed in one pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::problem::ProblemSpec;

/// Kind of an original-space variable and its coordinates in extended space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarKind {
    Continuous,
    /// Integer variable with `levels` grid values.
    Integer { levels: usize },
    /// Categorical variable stored in `width` slots (1 for two values).
    Categorical { size: usize, width: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarSlots {
    pub kind: VarKind,
    pub offset: usize,
}

/// The feasible set of unit-scaled extended points: continuous coordinates
/// in `[0, 1]`, integer coordinates on their scaled grid, unary blocks
/// one-hot.
#[derive(Clone, Debug)]
pub struct UnitDomain {
    pub vars: Vec<VarSlots>,
    pub dim: usize,
}

impl UnitDomain {
    pub fn new(spec: &ProblemSpec) -> Self {
        let layout = spec.layout();
        let (lo, hi) = spec.numeric_bounds();
        let mut vars = Vec::with_capacity(spec.n_vars());
        for j in 0..layout.n_numeric() {
            let kind = if j < layout.n_r {
                VarKind::Continuous
            } else {
                VarKind::Integer {
                    levels: (hi[j] - lo[j]) as usize + 1,
                }
            };
            vars.push(VarSlots { kind, offset: j });
        }
        for b in &layout.blocks {
            vars.push(VarSlots {
                kind: VarKind::Categorical {
                    size: b.size,
                    width: b.width(),
                },
                offset: b.offset,
            });
        }
        Self {
            vars,
            dim: layout.dim(),
        }
    }

    /// Continuous box `[0, 1]^n`.
    pub fn continuous(n: usize) -> Self {
        Self {
            vars: (0..n)
                .map(|j| VarSlots {
                    kind: VarKind::Continuous,
                    offset: j,
                })
                .collect(),
            dim: n,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn width(&self, var: usize) -> usize {
        match self.vars[var].kind {
            VarKind::Categorical { width, .. } => width,
            _ => 1,
        }
    }

    /// Writes a uniformly random value of variable `var` into `x`.
    pub fn resample_var<R: Rng + ?Sized>(&self, x: &mut [f64], var: usize, rng: &mut R) {
        let VarSlots { kind, offset } = self.vars[var];
        match kind {
            VarKind::Continuous => x[offset] = rng.random::<f64>(),
            VarKind::Integer { levels } => x[offset] = grid_value(rng.random_range(0..levels), levels),
            VarKind::Categorical { size, width } => {
                let v = rng.random_range(0..size);
                if width == 1 {
                    x[offset] = v as f64;
                } else {
                    for i in 0..width {
                        x[offset + i] = if i == v { 1.0 } else { 0.0 };
                    }
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for v in 0..self.vars.len() {
            self.resample_var(&mut x, v, rng);
        }
        x
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.sample(rng)).collect()
    }

    /// Closest feasible point: continuous coordinates clamped, integers
    /// rounded to the grid, binary slots rounded, unary blocks set to the
    /// basis vector of their largest entry (the l1-closest one).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for v in &self.vars {
            let j = v.offset;
            match v.kind {
                VarKind::Continuous => y[j] = y[j].clamp(0.0, 1.0),
                VarKind::Integer { levels } => {
                    let g = (y[j].clamp(0.0, 1.0) * (levels - 1) as f64).round() as usize;
                    y[j] = grid_value(g, levels);
                }
                VarKind::Categorical { width: 1, .. } => y[j] = if y[j] >= 0.5 { 1.0 } else { 0.0 },
                VarKind::Categorical { width, .. } => {
                    let block = &mut y[j..j + width];
                    let mut best = 0;
                    for i in 1..width {
                        if block[i] > block[best] {
                            best = i;
                        }
                    }
                    for (i, e) in block.iter_mut().enumerate() {
                        *e = if i == best { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        y
    }

    /// True when `x` is a feasible unit-scaled point.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        self.vars.iter().all(|v| match v.kind {
            VarKind::Continuous => (0.0..=1.0).contains(&x[v.offset]),
            VarKind::Integer { levels } => {
                let g = x[v.offset] * (levels - 1).max(1) as f64;
                (0.0..=1.0).contains(&x[v.offset]) && (g - g.round()).abs() < 1e-9
            }
            VarKind::Categorical { width, .. } => {
                let s = &x[v.offset..v.offset + width];
                s.iter().all(|&e| e == 0.0 || e == 1.0)
                    && (width == 1 || s.iter().sum::<f64>() == 1.0)
            }
        })
    }
}

/// Unit coordinate of grid index `i` of an integer variable.
pub fn grid_value(i: usize, levels: usize) -> f64 {
    if levels <= 1 {
        0.0
    } else {
        i as f64 / (levels - 1) as f64
    }
}

/// Genetic algorithm settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub base_population: usize,
    pub iterations: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            base_population: 400,
            iterations: 20,
        }
    }
}

impl GaConfig {
    pub fn intensive() -> Self {
        Self {
            base_population: 5000,
            iterations: 40,
        }
    }

    /// Population size for an `n`-dimensional problem.
    pub fn population(&self, n: usize) -> usize {
        (self.base_population + n / 5).max(4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub samples_per_dimension: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples_per_dimension: 1000,
        }
    }
}

impl SamplingConfig {
    pub fn intensive() -> Self {
        Self {
            samples_per_dimension: 3000,
        }
    }
}

/// Sizes of the survivor, offspring, mutant and random groups.
pub fn population_split(size: usize) -> (usize, usize, usize, usize) {
    let survivors = (0.25 * size as f64).round() as usize;
    let offspring = (0.25 * size as f64).round() as usize;
    let mutants = 1;
    let random = size - survivors - offspring - mutants;
    (survivors, offspring, mutants, random)
}

/// Indices sorting `scores` ascending; NaN sorts last, ties by index.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (scores[a], scores[b]);
        match (x.is_nan(), y.is_nan()) {
            (true, true) => a.cmp(&b),
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => x.total_cmp(&y).then(a.cmp(&b)),
        }
    });
    idx
}

/// One generation step. `current` must hold at least four individuals.
pub fn ga_next_population<R: Rng + ?Sized>(
    current: &[Vec<f64>],
    scores: &[f64],
    domain: &UnitDomain,
    mutation_age: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    assert!(current.len() >= 4, "population needs at least four individuals");
    let (n_surv, n_off, _, n_rand) = population_split(current.len());
    let order = ranking(scores);
    let survivors: Vec<&Vec<f64>> = order[..n_surv].iter().map(|&i| &current[i]).collect();
    let mut next: Vec<Vec<f64>> = survivors.iter().map(|x| (*x).clone()).collect();

    for _ in 0..n_off {
        let a = survivors[rng.random_range(0..n_surv)];
        let b = survivors[rng.random_range(0..n_surv)];
        let mut child = a.clone();
        for (v, slots) in domain.vars.iter().enumerate() {
            if rng.random_bool(0.5) {
                let w = domain.width(v);
                child[slots.offset..slots.offset + w].copy_from_slice(&b[slots.offset..slots.offset + w]);
            }
        }
        next.push(child);
    }

    let mut mutant = current[order[0]].clone();
    let k = domain.n_vars().min(1 + mutation_age);
    let half_width = 0.1 * 2f64.powf(-(mutation_age as f64) / 5.0);
    for v in rand::seq::index::sample(rng, domain.n_vars(), k) {
        match domain.vars[v].kind {
            VarKind::Continuous => {
                let j = domain.vars[v].offset;
                mutant[j] = (mutant[j] + rng.random_range(-half_width..=half_width)).clamp(0.0, 1.0);
            }
            _ => domain.resample_var(&mut mutant, v, rng),
        }
    }
    next.push(mutant);

    next.extend(domain.sample_many(n_rand, rng));
    next
}

/// Outcome of a genetic-algorithm run.
#[derive(Clone, Debug)]
pub struct GaResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Final population and its scores.
    pub population: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
    /// Best score of each generation.
    pub history: Vec<f64>,
}

/// Minimizes a population-level objective. The best individual of each
/// generation survives to the next, so for pointwise objectives the returned
/// value is the best over all generations.
pub fn ga_minimize<F, R>(mut objective: F, domain: &UnitDomain, config: &GaConfig, rng: &mut R) -> GaResult
where
    F: FnMut(&[Vec<f64>]) -> Vec<f64>,
    R: Rng + ?Sized,
{
    let size = config.population(domain.dim);
    let mut population = domain.sample_many(size, rng);
    let mut scores = objective(&population);
    let mut history = vec![best_of(&scores).1];
    for age in 0..config.iterations.max(1) {
        population = ga_next_population(&population, &scores, domain, age, rng);
        scores = objective(&population);
        history.push(best_of(&scores).1);
    }
    let (i, value) = best_of(&scores);
    GaResult {
        point: population[i].clone(),
        value,
        population,
        scores,
        history,
    }
}

fn best_of(scores: &[f64]) -> (usize, f64) {
    let i = ranking(scores)[0];
    (i, scores[i])
}

/// Outcome of the sampling minimizer.
#[derive(Clone, Debug)]
pub struct SampleResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub samples: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
}

/// Draws `samples_per_dimension * n` uniform points and keeps the best.
pub fn sample_minimize<F, R>(mut objective: F, domain: &UnitDomain, config: &SamplingConfig, rng: &mut R) -> SampleResult
where
    F: FnMut(&[Vec<f64>]) -> Vec<f64>,
    R: Rng + ?Sized,
{
    let count = (config.samples_per_dimension * domain.dim).max(1);
    sample_minimize_count(&mut objective, domain, count, rng)
}

pub fn sample_minimize_count<F, R>(mut objective: F, domain: &UnitDomain, count: usize, rng: &mut R) -> SampleResult
where
    F: FnMut(&[Vec<f64>]) -> Vec<f64>,
    R: Rng + ?Sized,
{
    let samples = domain.sample_many(count.max(1), rng);
    let scores = objective(&samples);
    let (i, value) = best_of(&scores);
    SampleResult {
        point: samples[i].clone(),
        value,
        samples,
        scores,
    }
}

/// Either minimizer, selected at run time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsolver {
    Ga(GaConfig),
    Sampling(SamplingConfig),
}

impl Default for Subsolver {
    fn default() -> Self {
        Subsolver::Ga(GaConfig::default())
    }
}

/// Result common to both minimizers: best point and value plus the final
/// candidate set with its scores.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub candidates: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
}

impl Subsolver {
    pub fn minimize<F, R>(&self, objective: F, domain: &UnitDomain, rng: &mut R) -> Minimum
    where
        F: FnMut(&[Vec<f64>]) -> Vec<f64>,
        R: Rng + ?Sized,
    {
        match self {
            Subsolver::Ga(c) => {
                let r = ga_minimize(objective, domain, c, rng);
                Minimum {
                    point: r.point,
                    value: r.value,
                    candidates: r.population,
                    scores: r.scores,
                }
            }
            Subsolver::Sampling(c) => {
                let r = sample_minimize(objective, domain, c, rng);
                Minimum {
                    point: r.point,
                    value: r.value,
                    candidates: r.samples,
                    scores: r.scores,
                }
            }
        }
    }
}

/// Adapts a pointwise function to the population-level interface.
pub fn pointwise<F: FnMut(&[f64]) -> f64>(mut f: F) -> impl FnMut(&[Vec<f64>]) -> Vec<f64> {
    move |pop: &[Vec<f64>]| pop.iter().map(|x| f(x)).collect()
}

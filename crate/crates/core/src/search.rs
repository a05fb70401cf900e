//! Iteration step: the cyclic search strategy and selection of the next
//! evaluation point, for both the Gutmann (bumpiness) and the metric
//! stochastic response surface (MSRSM) methods.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{min_distance, NODE_TOLERANCE};
use crate::rbf::{Bumpiness, BumpinessOracle, Interpolant};
use crate::subsolver::{pointwise, Subsolver, UnitDomain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Msrsm,
    Gutmann,
}

impl Algorithm {
    /// Whether the pure exploration step is part of the cycle by default.
    pub fn default_infstep(self) -> bool {
        matches!(self, Algorithm::Gutmann)
    }
}

/// Weight of the surrogate term in the MSRSM score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MsrsmVariant {
    /// Surrogate term weighted by 1.
    #[default]
    UnitSecondTerm,
    /// Surrogate term weighted by `1 - alpha`.
    OneMinusAlpha,
}

pub const DEFAULT_KAPPA: usize = 5;
/// Relative margin below `f_min` that makes the surrogate minimum acceptable
/// without further search.
pub const SHORTCUT_TOLERANCE: f64 = 1e-10;
/// Relative margin below `f_min` used as target when the shortcut fails.
pub const LOCAL_TARGET_MARGIN: f64 = 1e-2;
/// MSRSM weight floor, also used when the local shortcut fails.
pub const MIN_WEIGHT: f64 = 0.05;
/// Uniform draws attempted when the subsolver only finds existing nodes.
const RESAMPLE_TRIES: usize = 1000;

/// What kind of step the cycle is at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    InfStep,
    Global(usize),
    Local,
}

/// Position within the search cycle. Steps are numbered `-1` (InfStep),
/// `0..kappa` (global search) and `kappa` (local search).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleState {
    pub kappa: usize,
    pub step: i32,
    pub infstep_enabled: bool,
}

impl CycleState {
    pub fn new(kappa: usize, infstep_enabled: bool) -> Self {
        assert!(kappa >= 1, "cycle length must be positive");
        let mut s = Self {
            kappa,
            step: 0,
            infstep_enabled,
        };
        s.step = s.first_step();
        s
    }

    pub fn first_step(&self) -> i32 {
        if self.infstep_enabled {
            -1
        } else {
            0
        }
    }

    pub fn is_cycle_start(&self) -> bool {
        self.step == self.first_step()
    }

    /// Number of steps in one cycle.
    pub fn cycle_len(&self) -> usize {
        self.kappa + 1 + usize::from(self.infstep_enabled)
    }

    pub fn current(&self) -> Step {
        match self.step {
            -1 => Step::InfStep,
            s if s as usize == self.kappa => Step::Local,
            s => Step::Global(s as usize),
        }
    }

    /// Moves to the next step; returns true when a new cycle begins.
    pub fn advance(&mut self) -> bool {
        if self.step as usize == self.kappa && self.step >= 0 {
            self.step = self.first_step();
            true
        } else {
            self.step += 1;
            false
        }
    }

    /// The local model serves the local step and the last global step.
    pub fn uses_local_model(&self) -> bool {
        self.step >= 0 && self.step as usize + 1 >= self.kappa
    }

    pub fn reset(&mut self) {
        self.step = self.first_step();
    }
}

/// Target value of the Gutmann method.
pub fn gutmann_target(state: &CycleState, s_ystar: f64, f_max: f64) -> f64 {
    match state.current() {
        Step::InfStep => f64::NEG_INFINITY,
        Step::Global(l) => {
            let w = 1.0 - l as f64 / state.kappa as f64;
            s_ystar - w * w * (f_max - s_ystar)
        }
        Step::Local => s_ystar,
    }
}

/// `(-1)^(d+1)`.
pub fn bumpiness_sign(degree: i32) -> f64 {
    if degree.rem_euclid(2) == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Gutmann's utility `h = 1 / ((-1)^(d+1) mu (s - f*)^2)`; zero at nodes.
/// For `f* = -inf` the utility `1 / ((-1)^(d+1) mu)` is returned instead.
pub fn gutmann_h(f_star: f64, mu: Bumpiness, s_value: f64, degree: i32) -> f64 {
    match mu {
        Bumpiness::AtNode => 0.0,
        Bumpiness::Value(mu) => 1.0 / gutmann_g(f_star, mu, s_value, degree),
    }
}

/// Reciprocal of [`gutmann_h`]; the quantity minimized by the search.
pub fn gutmann_g(f_star: f64, mu: f64, s_value: f64, degree: i32) -> f64 {
    let m = bumpiness_sign(degree) * mu;
    if f_star == f64::NEG_INFINITY {
        m
    } else {
        m * (s_value - f_star) * (s_value - f_star)
    }
}

/// MSRSM weight of the distance term; `+inf` requests pure exploration.
pub fn msrsm_weight(state: &CycleState) -> f64 {
    match state.current() {
        Step::InfStep => f64::INFINITY,
        Step::Global(l) => (1.0 - (l as f64 + 1.0) / state.kappa as f64).max(MIN_WEIGHT),
        Step::Local => 0.0,
    }
}

/// MSRSM scores of the reference set `R` given each point's distance to the
/// nodes and surrogate value. Lower is better.
pub fn msrsm_scores(dists: &[f64], svals: &[f64], alpha: f64, variant: MsrsmVariant) -> Result<Vec<f64>> {
    if dists.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    if alpha == f64::INFINITY {
        return Ok(dists.iter().map(|d| -d).collect());
    }
    let (dmin, dmax) = min_max(dists);
    let (smin, smax) = min_max(svals);
    let w2 = match variant {
        MsrsmVariant::UnitSecondTerm => 1.0,
        MsrsmVariant::OneMinusAlpha => 1.0 - alpha,
    };
    Ok(dists
        .iter()
        .zip(svals)
        .map(|(&d, &s)| {
            let t1 = if dmax > dmin { (dmax - d) / (dmax - dmin) } else { 0.0 };
            let t2 = if smax > smin { (s - smin) / (smax - smin) } else { 0.0 };
            alpha * t1 + w2 * t2
        })
        .collect())
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Everything the point selection needs.
pub struct SearchInput<'a> {
    pub algorithm: Algorithm,
    pub variant: MsrsmVariant,
    pub cycle: &'a CycleState,
    /// Surrogate for the current step (nodes in unit-scaled space).
    pub model: &'a Interpolant,
    /// Every occupied point; the result must be distinct from all of them.
    pub nodes: &'a [Vec<f64>],
    pub f_min: f64,
    pub f_max: f64,
    pub domain: &'a UnitDomain,
    pub subsolver: &'a Subsolver,
}

/// Selected point and how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub point: Vec<f64>,
    /// The surrogate minimizer was accepted directly.
    pub shortcut: bool,
    pub predicted: f64,
}

fn is_free(x: &[f64], nodes: &[Vec<f64>]) -> bool {
    min_distance(x, nodes) > NODE_TOLERANCE
}

/// Minimizer `y*` of the surrogate.
pub fn surrogate_minimum<R: Rng + ?Sized>(
    model: &Interpolant,
    domain: &UnitDomain,
    subsolver: &Subsolver,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let m = subsolver.minimize(pointwise(|x| model.predict(x)), domain, rng);
    (m.point, m.value)
}

/// Determines the next point to evaluate at the current cycle step.
pub fn next_point<R: Rng + ?Sized>(input: &SearchInput<'_>, rng: &mut R) -> Result<Proposal> {
    let step = input.cycle.current();
    let model = input.model;
    let f_min = input.f_min;

    let needs_ystar = match input.algorithm {
        Algorithm::Gutmann => step != Step::InfStep,
        Algorithm::Msrsm => step == Step::Local,
    };
    let ystar = needs_ystar.then(|| surrogate_minimum(model, input.domain, input.subsolver, rng));

    if step == Step::Local {
        let (y, sy) = ystar.as_ref().expect("computed above");
        if *sy < f_min - SHORTCUT_TOLERANCE * f_min.abs() && is_free(y, input.nodes) {
            return Ok(Proposal {
                point: y.clone(),
                shortcut: true,
                predicted: *sy,
            });
        }
    }

    let best = match input.algorithm {
        Algorithm::Gutmann => {
            let f_star = match step {
                Step::Local => f_min - LOCAL_TARGET_MARGIN * f_min.abs(),
                _ => gutmann_target(input.cycle, ystar.as_ref().map_or(0.0, |y| y.1), input.f_max),
            };
            let oracle = BumpinessOracle::new(model.kind, &model.nodes(), &model.eliminated_columns)?;
            let degree = model.kind.degree();
            let nodes = input.nodes;
            let objective = pointwise(|x: &[f64]| {
                if !is_free(x, nodes) {
                    return f64::INFINITY;
                }
                match oracle.mu(x) {
                    Bumpiness::AtNode => f64::INFINITY,
                    Bumpiness::Value(mu) => {
                        let s = if f_star == f64::NEG_INFINITY { 0.0 } else { model.predict(x) };
                        let g = gutmann_g(f_star, mu, s, degree);
                        if g.is_nan() {
                            f64::INFINITY
                        } else {
                            g
                        }
                    }
                }
            });
            input.subsolver.minimize(objective, input.domain, rng)
        }
        Algorithm::Msrsm => {
            let alpha = match step {
                Step::Local => MIN_WEIGHT,
                _ => msrsm_weight(input.cycle),
            };
            let nodes = input.nodes;
            let variant = input.variant;
            let objective = |pop: &[Vec<f64>]| msrsm_population_scores(pop, model, nodes, alpha, variant);
            input.subsolver.minimize(objective, input.domain, rng)
        }
    };

    if best.value.is_finite() && is_free(&best.point, input.nodes) {
        let predicted = model.predict(&best.point);
        return Ok(Proposal {
            point: best.point,
            shortcut: false,
            predicted,
        });
    }
    for _ in 0..RESAMPLE_TRIES {
        let x = input.domain.sample(rng);
        if is_free(&x, input.nodes) {
            let predicted = model.predict(&x);
            return Ok(Proposal {
                point: x,
                shortcut: false,
                predicted,
            });
        }
    }
    Err(Error::NoDistinctPoint)
}

/// MSRSM scores over a candidate population, normalized within the
/// population. Candidates coinciding with a node score `+inf` and do not
/// enter the normalization.
pub fn msrsm_population_scores(
    pop: &[Vec<f64>],
    model: &Interpolant,
    nodes: &[Vec<f64>],
    alpha: f64,
    variant: MsrsmVariant,
) -> Vec<f64> {
    let mut free = Vec::with_capacity(pop.len());
    let mut dists = Vec::with_capacity(pop.len());
    let mut svals = Vec::with_capacity(pop.len());
    for (i, x) in pop.iter().enumerate() {
        let d = min_distance(x, nodes);
        if d > NODE_TOLERANCE {
            free.push(i);
            dists.push(d);
            svals.push(if alpha == f64::INFINITY { 0.0 } else { model.predict(x) });
        }
    }
    let mut out = vec![f64::INFINITY; pop.len()];
    if let Ok(scores) = msrsm_scores(&dists, &svals, alpha, variant) {
        for (k, i) in free.into_iter().enumerate() {
            out[i] = scores[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbf::{fit, RbfKind};
    use crate::subsolver::SamplingConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn target_examples() {
        let mut c = CycleState::new(5, true);
        assert_eq!(gutmann_target(&c, 1.0, 5.0), f64::NEG_INFINITY);
        c.advance();
        assert_eq!(gutmann_target(&c, 1.0, 5.0), -3.0);
        c.step = 5;
        assert_eq!(gutmann_target(&c, 1.0, 5.0), 1.0);
    }

    #[test]
    fn utility_examples() {
        assert_eq!(gutmann_h(0.0, Bumpiness::AtNode, 1.0, 1), 0.0);
        assert_eq!(gutmann_h(0.0, Bumpiness::Value(2.0), 1.0, 1), 0.5);
        assert_eq!(gutmann_h(0.0, Bumpiness::Value(-2.0), 1.0, 0), 0.5);
        let h1 = gutmann_h(0.0, Bumpiness::Value(2.0), 1.0, 1);
        let h2 = gutmann_h(0.0, Bumpiness::Value(2.0), 2.0, 1);
        assert_eq!(h2, h1 / 4.0);
    }

    #[test]
    fn weight_examples() {
        let mut c = CycleState::new(5, false);
        assert_eq!(msrsm_weight(&c), 0.8);
        c.step = 4;
        assert_eq!(msrsm_weight(&c), 0.05);
        c.step = 5;
        assert_eq!(msrsm_weight(&c), 0.0);
        c.step = -1;
        assert_eq!(msrsm_weight(&c), f64::INFINITY);
    }

    #[test]
    fn cycle_wraps() {
        for infstep in [false, true] {
            let mut c = CycleState::new(5, infstep);
            let mut steps = 0;
            loop {
                steps += 1;
                if c.advance() {
                    break;
                }
            }
            assert_eq!(steps, c.cycle_len());
            assert_eq!(c.step, if infstep { -1 } else { 0 });
        }
    }

    #[test]
    fn targets_non_decreasing_in_step() {
        let mut c = CycleState::new(7, false);
        let mut last = f64::NEG_INFINITY;
        for _ in 0..=7 {
            let t = gutmann_target(&c, -2.0, 10.0);
            assert!(t >= last);
            last = t;
            c.advance();
        }
    }

    #[test]
    fn score_examples() {
        // Candidate 0 has the largest distance and the smallest value.
        let s = msrsm_scores(&[3.0, 1.0, 2.0], &[0.0, 5.0, 2.0], 1.0, MsrsmVariant::UnitSecondTerm).unwrap();
        assert_eq!(s[0], 0.0);
        let s = msrsm_scores(&[3.0, 1.0, 2.0], &[0.0, 5.0, 2.0], 0.0, MsrsmVariant::UnitSecondTerm).unwrap();
        assert_eq!(s, vec![0.0, 1.0, 0.4]);
        let s = msrsm_scores(&[3.0, 1.0, 2.0], &[0.0, 5.0, 2.0], f64::INFINITY, MsrsmVariant::UnitSecondTerm).unwrap();
        assert_eq!(s, vec![-3.0, -1.0, -2.0]);
        let s = msrsm_scores(&[1.0, 1.0], &[2.0, 2.0], 0.5, MsrsmVariant::OneMinusAlpha).unwrap();
        assert_eq!(s, vec![0.0, 0.0]);
        assert!(matches!(
            msrsm_scores(&[], &[], 0.5, MsrsmVariant::UnitSecondTerm),
            Err(Error::EmptyReferenceSet)
        ));
    }

    fn corner_model() -> (Vec<Vec<f64>>, Interpolant) {
        let nodes = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let m = fit(RbfKind::cubic(), &nodes, &[10.0, 11.0, 12.0, 13.0], &[]).unwrap();
        (nodes, m)
    }

    #[test]
    fn infstep_goes_to_the_centre() {
        let (nodes, model) = corner_model();
        let cycle = CycleState::new(5, true);
        let domain = UnitDomain::continuous(2);
        let sub = Subsolver::Sampling(SamplingConfig {
            samples_per_dimension: 50_000,
        });
        let input = SearchInput {
            algorithm: Algorithm::Msrsm,
            variant: MsrsmVariant::UnitSecondTerm,
            cycle: &cycle,
            model: &model,
            nodes: &nodes,
            f_min: 10.0,
            f_max: 13.0,
            domain: &domain,
            subsolver: &sub,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = next_point(&input, &mut rng).unwrap();
        assert!((p.point[0] - 0.5).abs() < 0.05 && (p.point[1] - 0.5).abs() < 0.05, "{:?}", p.point);
    }

    #[test]
    fn local_shortcut_accepts_surrogate_minimum() {
        // Values make the surrogate dip below f_min inside the square.
        let nodes = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
        ];
        let model = fit(RbfKind::cubic(), &nodes, &[20.0, 20.0, 20.0, 20.0, 10.0], &[]).unwrap();
        let mut cycle = CycleState::new(5, false);
        cycle.step = 5;
        let domain = UnitDomain::continuous(2);
        let sub = Subsolver::default();
        for algorithm in [Algorithm::Msrsm, Algorithm::Gutmann] {
            let input = SearchInput {
                algorithm,
                variant: MsrsmVariant::UnitSecondTerm,
                cycle: &cycle,
                model: &model,
                nodes: &nodes,
                f_min: 11.0,
                f_max: 20.0,
                domain: &domain,
                subsolver: &sub,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let p = next_point(&input, &mut rng).unwrap();
            assert!(p.shortcut);
            assert!(p.predicted < 11.0);
        }
    }

    #[test]
    fn proposals_avoid_nodes() {
        let (nodes, model) = corner_model();
        let domain = UnitDomain::continuous(2);
        let sub = Subsolver::Ga(crate::subsolver::GaConfig {
            base_population: 40,
            iterations: 5,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for algorithm in [Algorithm::Msrsm, Algorithm::Gutmann] {
            let mut cycle = CycleState::new(3, true);
            for _ in 0..10 {
                let input = SearchInput {
                    algorithm,
                    variant: MsrsmVariant::UnitSecondTerm,
                    cycle: &cycle,
                    model: &model,
                    nodes: &nodes,
                    f_min: 10.0,
                    f_max: 13.0,
                    domain: &domain,
                    subsolver: &sub,
                };
                let p = next_point(&input, &mut rng).unwrap();
                assert!(min_distance(&p.point, &nodes) > NODE_TOLERANCE);
                cycle.advance();
            }
        }
    }
}

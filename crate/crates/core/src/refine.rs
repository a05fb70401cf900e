//! Refinement step: local descent on a linear model around the incumbent.
//!
//! The step is written as a state machine. [`RefinementState::propose`]
//! returns the next point to evaluate and [`RefinementState::observe`]
//! consumes its value, so the serial engine and the parallel master can
//! drive it the same way.
//!
//! All work happens in unit-scaled coordinates with the last slot of every
//! unary block dropped: the slots of a block sum to one, so keeping all of
//! them would make any sample set affinely dependent.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::problem::{sq_dist, NODE_TOLERANCE};
use crate::subsolver::{grid_value, UnitDomain, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub beta_mr: f64,
    pub beta_rm: f64,
    pub kappa_rs: f64,
    pub kappa_re: f64,
    pub kappa_rm: f64,
    pub t_rf: usize,
    pub t_rs: usize,
    pub eps_grad: f64,
    pub rounding_trials: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            beta_mr: 1e-3,
            beta_rm: 1.0,
            kappa_rs: 0.25,
            kappa_re: 0.75,
            kappa_rm: 0.0,
            t_rf: 3,
            t_rs: 5,
            eps_grad: 1e-3,
            rounding_trials: 10,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = 0.0 <= self.kappa_rm
            && self.kappa_rm <= self.kappa_rs
            && self.kappa_rs < self.kappa_re
            && self.beta_mr > 0.0
            && self.t_rs >= 1
            && self.rounding_trials >= 1;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config(format!("invalid refinement settings {self:?}")))
        }
    }

    pub fn initial_radius_floor(&self) -> f64 {
        self.beta_mr * 2f64.powf(self.beta_rm)
    }
}

/// Whether a refinement phase should start now.
pub fn should_trigger(
    cycles_since_last: usize,
    improved_since_last: bool,
    last_stop_was_iteration_limit: bool,
    config: &RefineConfig,
) -> bool {
    cycles_since_last >= config.t_rf && (improved_since_last || last_stop_was_iteration_limit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    IterationLimit,
    RadiusTooSmall,
    SmallGradient,
    GeometryFailure,
}

/// Maximum number of consecutive failed geometry repairs.
pub const MAX_GEOMETRY_FAILURES: usize = 5;
/// Relative tolerance (times the radius) for affine dependence of the
/// sample set.
pub const GEOMETRY_TOLERANCE: f64 = 1e-6;

/// Conversion between full unit coordinates and the reduced coordinates
/// used by the linear model.
#[derive(Clone, Debug)]
struct Reducer {
    keep: Vec<usize>,
    /// (first slot, eliminated slot) of every unary block.
    blocks: Vec<(usize, usize)>,
    dim: usize,
}

impl Reducer {
    fn new(domain: &UnitDomain) -> Self {
        let mut keep = Vec::new();
        let mut blocks = Vec::new();
        for v in &domain.vars {
            match v.kind {
                VarKind::Categorical { width, .. } if width > 1 => {
                    keep.extend(v.offset..v.offset + width - 1);
                    blocks.push((v.offset, v.offset + width - 1));
                }
                _ => keep.push(v.offset),
            }
        }
        Self {
            keep,
            blocks,
            dim: domain.dim,
        }
    }

    fn reduce(&self, x: &[f64]) -> Vec<f64> {
        self.keep.iter().map(|&j| x[j]).collect()
    }

    fn expand(&self, r: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (&j, &v) in self.keep.iter().zip(r) {
            x[j] = v;
        }
        for &(first, last) in &self.blocks {
            let s: f64 = x[first..last].iter().sum();
            x[last] = (1.0 - s).clamp(0.0, 1.0);
        }
        x
    }

    fn len(&self) -> usize {
        self.keep.len()
    }
}

/// Probabilistic rounding of a fractional unit-scaled point: integer
/// coordinates round down with probability `ceil(v) - v`, unary blocks go
/// to basis vector `e_i` with probability `z_i / sum(z)`, binary slots to 1
/// with probability equal to their value. Of `trials` roundings the one with
/// the lowest `score` is kept.
pub fn round_point<F, R>(x: &[f64], domain: &UnitDomain, score: F, trials: usize, rng: &mut R) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let discrete = domain.vars.iter().any(|v| v.kind != VarKind::Continuous);
    if !discrete {
        return domain.project(x);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..trials.max(1) {
        let y = round_once(x, domain, rng);
        let s = score(&y);
        if best.as_ref().is_none_or(|(b, _)| s < *b) {
            best = Some((s, y));
        }
    }
    best.unwrap().1
}

fn round_once<R: Rng + ?Sized>(x: &[f64], domain: &UnitDomain, rng: &mut R) -> Vec<f64> {
    let mut y = x.to_vec();
    for v in &domain.vars {
        let j = v.offset;
        match v.kind {
            VarKind::Continuous => y[j] = y[j].clamp(0.0, 1.0),
            VarKind::Integer { levels } => {
                let g = y[j].clamp(0.0, 1.0) * (levels - 1) as f64;
                let lo = g.floor();
                let up = rng.random::<f64>() < g - lo;
                let i = (lo as usize + usize::from(up)).min(levels - 1);
                y[j] = grid_value(i, levels);
            }
            VarKind::Categorical { width: 1, .. } => {
                let p = y[j].clamp(0.0, 1.0);
                y[j] = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
            }
            VarKind::Categorical { width, .. } => {
                let block = &mut y[j..j + width];
                let z: Vec<f64> = block.iter().map(|v| v.max(0.0)).collect();
                let total: f64 = z.iter().sum();
                let pick = if total > 0.0 {
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = width - 1;
                    for (i, zi) in z.iter().enumerate() {
                        if u < *zi {
                            pick = i;
                            break;
                        }
                        u -= zi;
                    }
                    pick
                } else {
                    rng.random_range(0..width)
                };
                for (i, e) in block.iter_mut().enumerate() {
                    *e = if i == pick { 1.0 } else { 0.0 };
                }
            }
        }
    }
    y
}

/// Column-pivoted Gram-Schmidt. Returns the orthonormal vectors of the
/// independent columns, the indices of the columns found dependent (their
/// residual norm is below `tol`), ordered by residual, and the residuals.
fn pivoted_gram_schmidt(cols: &[Vec<f64>], tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut work: Vec<Vec<f64>> = cols.to_vec();
    let mut remaining: Vec<usize> = (0..cols.len()).collect();
    let mut q: Vec<Vec<f64>> = Vec::new();
    while !remaining.is_empty() {
        let (pos, norm) = remaining
            .iter()
            .enumerate()
            .map(|(p, &c)| (p, norm(&work[c])))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if norm < tol {
            break;
        }
        let c = remaining.swap_remove(pos);
        let qv: Vec<f64> = work[c].iter().map(|v| v / norm).collect();
        for &o in &remaining {
            let d = dot(&qv, &work[o]);
            for (w, qi) in work[o].iter_mut().zip(&qv) {
                *w -= d * qi;
            }
        }
        q.push(qv);
    }
    remaining.sort_by(|&a, &b| norm(&work[a]).total_cmp(&norm(&work[b])));
    (q, remaining)
}

/// Unit vector orthogonal to every vector of the orthonormal set `q`.
fn orthogonal_complement(q: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut best = vec![0.0; n];
    let mut best_norm = -1.0;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for qv in q {
            let d = qv[j];
            for (ei, qi) in e.iter_mut().zip(qv) {
                *ei -= d * qi;
            }
        }
        // A second pass keeps the result orthogonal in floating point.
        for qv in q {
            let d = dot(qv, &e);
            for (ei, qi) in e.iter_mut().zip(qv) {
                *ei -= d * qi;
            }
        }
        let nn = norm(&e);
        if nn > best_norm {
            best_norm = nn;
            best = e;
        }
    }
    best.iter().map(|v| v / best_norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
enum Pending {
    Geometry { replace: usize, rank_before: usize },
    Step { candidate: Vec<f64>, expected: f64 },
}

/// What a proposed point is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProposalKind {
    GeometryRepair,
    Step,
}

/// Local sample set, incumbent, radius and linear model.
#[derive(Clone, Debug)]
pub struct RefinementState {
    reducer: Reducer,
    /// Sample set in reduced coordinates; `s[0]` is not special.
    pub s: Vec<Vec<f64>>,
    pub s_values: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub f_bar: f64,
    pub rho: f64,
    pub c: Vec<f64>,
    pub b: f64,
    pub iterations_done: usize,
    pub stop_reason: Option<StopReason>,
    /// Allows iterations beyond the limit (set near the end of the budget).
    pub allow_extra_iterations: bool,
    geometry_failures: usize,
    pending: Option<Pending>,
}

impl RefinementState {
    /// Sets up the sample set around the best of `nodes` (full unit
    /// coordinates). Returns `None` when fewer than `n + 1` finite points are
    /// available, `n` being the reduced dimension.
    pub fn init(nodes: &[Vec<f64>], values: &[f64], domain: &UnitDomain, config: &RefineConfig) -> Option<Self> {
        let reducer = Reducer::new(domain);
        let n = reducer.len();
        let finite: Vec<usize> = (0..nodes.len()).filter(|&i| values[i].is_finite()).collect();
        if finite.len() < n + 1 {
            return None;
        }
        let best = *finite
            .iter()
            .min_by(|&&a, &&b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))?;
        let x_bar = reducer.reduce(&nodes[best]);
        let mut by_dist: Vec<(f64, usize)> = finite
            .iter()
            .map(|&i| (sq_dist(&reducer.reduce(&nodes[i]), &x_bar), i))
            .collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 != best).cmp(&(b.1 != best))).then(a.1.cmp(&b.1)));
        let chosen = &by_dist[..n + 1];
        let hat_rank = (n + 1).div_ceil(2);
        let rho = chosen[hat_rank - 1].0.sqrt().max(config.initial_radius_floor());
        Some(Self {
            s: chosen.iter().map(|&(_, i)| reducer.reduce(&nodes[i])).collect(),
            s_values: chosen.iter().map(|&(_, i)| values[i]).collect(),
            f_bar: values[best],
            x_bar,
            rho,
            c: vec![0.0; n],
            b: 0.0,
            iterations_done: 0,
            stop_reason: None,
            allow_extra_iterations: false,
            geometry_failures: 0,
            pending: None,
            reducer,
        })
    }

    /// Incumbent in full unit coordinates.
    pub fn incumbent(&self) -> Vec<f64> {
        self.reducer.expand(&self.x_bar)
    }

    /// Sample set in full unit coordinates.
    pub fn sample_set(&self) -> Vec<Vec<f64>> {
        self.s.iter().map(|r| self.reducer.expand(r)).collect()
    }

    pub fn is_active(&self) -> bool {
        self.stop_reason.is_none()
    }

    /// Restarts the iteration counter after a stop caused by the iteration
    /// limit, keeping sample set and radius.
    pub fn resume(&mut self) {
        if self.stop_reason == Some(StopReason::IterationLimit) {
            self.stop_reason = None;
            self.iterations_done = 0;
        }
    }

    fn index_of_xbar(&self) -> usize {
        self.s
            .iter()
            .position(|p| sq_dist(p, &self.x_bar) <= NODE_TOLERANCE * NODE_TOLERANCE)
            .unwrap_or(0)
    }

    fn centered_columns(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        let xi = self.index_of_xbar();
        let mut cols = Vec::new();
        let mut idx = Vec::new();
        for (i, p) in self.s.iter().enumerate() {
            if i != xi {
                cols.push(p.iter().zip(&self.x_bar).map(|(a, b)| a - b).collect());
                idx.push(i);
            }
        }
        (cols, idx)
    }

    /// Rank of the centered sample matrix.
    pub fn affine_rank(&self) -> usize {
        let (cols, _) = self.centered_columns();
        pivoted_gram_schmidt(&cols, GEOMETRY_TOLERANCE * self.rho).0.len()
    }

    /// Least-squares linear model over the sample set.
    fn fit_model(&mut self) {
        let n = self.reducer.len();
        let m = self.s.len();
        let mut a = DMatrix::zeros(m, n + 1);
        for (i, p) in self.s.iter().enumerate() {
            for j in 0..n {
                a[(i, j)] = p[j];
            }
            a[(i, n)] = 1.0;
        }
        let f = DVector::from_column_slice(&self.s_values);
        let sol = a
            .svd(true, true)
            .solve(&f, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(n + 1));
        self.c = sol.rows(0, n).iter().copied().collect();
        self.b = sol[n];
    }

    fn stop(&mut self, reason: StopReason) -> Option<(Vec<f64>, ProposalKind)> {
        self.stop_reason = Some(reason);
        self.pending = None;
        None
    }

    /// Next point to evaluate (full unit coordinates, feasible), or `None`
    /// once the phase has stopped.
    pub fn propose<R: Rng + ?Sized>(
        &mut self,
        domain: &UnitDomain,
        config: &RefineConfig,
        rng: &mut R,
    ) -> Option<(Vec<f64>, ProposalKind)> {
        loop {
            if self.stop_reason.is_some() {
                return None;
            }
            if self.iterations_done >= config.t_rs && !self.allow_extra_iterations {
                return self.stop(StopReason::IterationLimit);
            }
            if self.rho < config.beta_mr {
                return self.stop(StopReason::RadiusTooSmall);
            }
            let n = self.reducer.len();
            let (cols, idx) = self.centered_columns();
            let (q, dependent) = pivoted_gram_schmidt(&cols, GEOMETRY_TOLERANCE * self.rho);
            if q.len() < n {
                if self.geometry_failures >= MAX_GEOMETRY_FAILURES {
                    return self.stop(StopReason::GeometryFailure);
                }
                let dir = orthogonal_complement(&q, n);
                let replace = dependent.first().map_or_else(|| self.farthest(), |&d| idx[d]);
                let mut cand = self.step_in_box(&dir, self.rho, true);
                if norm_diff(&cand, &self.x_bar) < 0.5 * self.rho {
                    cand = self.step_in_box(&dir.iter().map(|v| -v).collect::<Vec<_>>(), self.rho, true);
                }
                let point = domain.project(&self.reducer.expand(&cand));
                self.pending = Some(Pending::Geometry {
                    replace,
                    rank_before: q.len(),
                });
                return Some((point, ProposalKind::GeometryRepair));
            }

            self.fit_model();
            let gnorm = norm(&self.c);
            if !(gnorm >= config.eps_grad) {
                return self.stop(StopReason::SmallGradient);
            }
            let dir: Vec<f64> = self.c.iter().map(|v| -v / gnorm).collect();
            let cand = self.step_in_box(&dir, self.rho, false);
            let c = self.c.clone();
            let reducer = &self.reducer;
            let point = round_point(
                &reducer.expand(&cand),
                domain,
                |y| dot(&c, &reducer.reduce(y)),
                config.rounding_trials,
                rng,
            );
            let cand_r = self.reducer.reduce(&point);
            let expected: f64 = dot(&self.c, &self.x_bar) - dot(&self.c, &cand_r);
            if !(expected > 0.0) {
                // No expected decrease: shrink without evaluating.
                self.iterations_done += 1;
                self.rho /= 2.0;
                continue;
            }
            self.pending = Some(Pending::Step {
                candidate: cand_r,
                expected,
            });
            return Some((point, ProposalKind::Step));
        }
    }

    /// Largest step `t <= max_t` along `dir` from the incumbent staying in
    /// the unit box. With `full`, the step is simply clamped instead.
    fn step_in_box(&self, dir: &[f64], max_t: f64, full: bool) -> Vec<f64> {
        if full {
            return self
                .x_bar
                .iter()
                .zip(dir)
                .map(|(x, d)| (x + max_t * d).clamp(0.0, 1.0))
                .collect();
        }
        let mut t = max_t;
        for (x, d) in self.x_bar.iter().zip(dir) {
            if *d > 0.0 {
                t = t.min((1.0 - x) / d);
            } else if *d < 0.0 {
                t = t.min(-x / d);
            }
        }
        let t = t.max(0.0);
        self.x_bar
            .iter()
            .zip(dir)
            .map(|(x, d)| (x + t * d).clamp(0.0, 1.0))
            .collect()
    }

    fn farthest(&self) -> usize {
        let mut best = 0;
        let mut dmax = -1.0;
        for (i, p) in self.s.iter().enumerate() {
            let d = sq_dist(p, &self.x_bar);
            if d > dmax {
                dmax = d;
                best = i;
            }
        }
        best
    }

    /// Feeds the objective value of the last proposed point.
    pub fn observe(&mut self, point: &[f64], value: f64, config: &RefineConfig) {
        let r = self.reducer.reduce(point);
        match self.pending.take() {
            Some(Pending::Geometry { replace, rank_before }) => {
                let old = (self.s[replace].clone(), self.s_values[replace]);
                self.s[replace] = r.clone();
                self.s_values[replace] = value;
                let in_set = self
                    .s
                    .iter()
                    .enumerate()
                    .any(|(i, p)| i != replace && sq_dist(p, &r) <= NODE_TOLERANCE * NODE_TOLERANCE);
                if in_set || !value.is_finite() || self.affine_rank() <= rank_before {
                    self.s[replace] = old.0;
                    self.s_values[replace] = old.1;
                    self.geometry_failures += 1;
                } else {
                    self.geometry_failures = 0;
                    if value < self.f_bar {
                        self.x_bar = r;
                        self.f_bar = value;
                    }
                }
            }
            Some(Pending::Step { candidate, expected }) => {
                debug_assert!(sq_dist(&candidate, &r) <= 1e-18);
                self.iterations_done += 1;
                let ratio = if value.is_finite() {
                    (self.f_bar - value) / expected
                } else {
                    f64::NEG_INFINITY
                };
                if ratio <= config.kappa_rs {
                    self.rho /= 2.0;
                }
                if ratio >= config.kappa_re {
                    self.rho *= 2.0;
                }
                if ratio >= config.kappa_rm {
                    self.x_bar = r.clone();
                    self.f_bar = value;
                }
                let present = self.s.iter().any(|p| sq_dist(p, &r) <= NODE_TOLERANCE * NODE_TOLERANCE);
                if !present && value.is_finite() {
                    let far = self.farthest();
                    if sq_dist(&r, &self.x_bar) < sq_dist(&self.s[far], &self.x_bar) {
                        self.s[far] = r;
                        self.s_values[far] = value;
                    }
                }
            }
            None => {}
        }
    }
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trigger_examples() {
        let c = RefineConfig::default();
        assert!(should_trigger(3, true, false, &c));
        assert!(should_trigger(3, false, true, &c));
        assert!(!should_trigger(2, true, true, &c));
        assert!(!should_trigger(5, false, false, &c));
    }

    #[test]
    fn init_on_three_points() {
        let c = RefineConfig::default();
        let nodes = vec![vec![0.0], vec![0.4], vec![1.0]];
        let st = RefinementState::init(&nodes, &[1.0, 2.0, 3.0], &UnitDomain::continuous(1), &c).unwrap();
        assert_eq!(st.s, vec![vec![0.0], vec![0.4]]);
        assert_eq!(st.x_bar, vec![0.0]);
        assert_eq!(st.rho, c.beta_mr * 2.0);
        assert!(RefinementState::init(&nodes[..1], &[1.0], &UnitDomain::continuous(1), &c).is_none());
    }

    #[test]
    fn geometry_repair_of_collinear_set() {
        let c = RefineConfig::default();
        let nodes = vec![vec![0.5, 0.5], vec![0.6, 0.6], vec![0.7, 0.7]];
        let domain = UnitDomain::continuous(2);
        let mut st = RefinementState::init(&nodes, &[0.0, 1.0, 2.0], &domain, &c).unwrap();
        assert_eq!(st.affine_rank(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (p, kind) = st.propose(&domain, &c, &mut rng).unwrap();
        assert_eq!(kind, ProposalKind::GeometryRepair);
        let d = [p[0] - 0.5, p[1] - 0.5];
        assert!((d[0] + d[1]).abs() < 1e-6, "{d:?}");
        assert!((norm(&d) - st.rho).abs() < 1e-12);
        st.observe(&p, 1.5, &c);
        assert_eq!(st.affine_rank(), 2);
    }

    #[test]
    fn independent_set_needs_no_repair() {
        let c = RefineConfig::default();
        let domain = UnitDomain::continuous(2);
        let nodes = vec![vec![0.5, 0.5], vec![0.6, 0.5], vec![0.5, 0.6]];
        // f = x + y: exact linear model, step accepted with ratio 1.
        let values: Vec<f64> = nodes.iter().map(|p| p[0] + p[1]).collect();
        let mut st = RefinementState::init(&nodes, &values, &domain, &c).unwrap();
        let rho0 = st.rho;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p, kind) = st.propose(&domain, &c, &mut rng).unwrap();
        assert_eq!(kind, ProposalKind::Step);
        st.observe(&p, p[0] + p[1], &c);
        assert_eq!(st.rho, 2.0 * rho0);
        assert_eq!(st.x_bar, p);
    }

    #[test]
    fn low_ratio_halves_radius() {
        let c = RefineConfig::default();
        let domain = UnitDomain::continuous(2);
        let nodes = vec![vec![0.5, 0.5], vec![0.6, 0.5], vec![0.5, 0.6]];
        let values: Vec<f64> = nodes.iter().map(|p| p[0] + p[1]).collect();
        let mut st = RefinementState::init(&nodes, &values, &domain, &c).unwrap();
        let rho0 = st.rho;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p, _) = st.propose(&domain, &c, &mut rng).unwrap();
        let expected = 1.0 - (p[0] + p[1]);
        st.observe(&p, 1.0 - 0.125 * expected, &c);
        assert_eq!(st.rho, rho0 / 2.0);
    }

    #[test]
    fn descends_on_a_quadratic() {
        // f = |x|^2 on [-1, 1]^2, unit coordinates u = (x + 1) / 2.
        let f = |u: &[f64]| u.iter().map(|v| (2.0 * v - 1.0).powi(2)).sum::<f64>();
        let c = RefineConfig {
            t_rs: 100,
            ..RefineConfig::default()
        };
        let domain = UnitDomain::continuous(2);
        let nodes = vec![vec![0.9, 0.9], vec![0.95, 0.9], vec![0.9, 0.95]];
        let values: Vec<f64> = nodes.iter().map(|p| f(p)).collect();
        let mut st = RefinementState::init(&nodes, &values, &domain, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        while st.iterations_done < 10 {
            let Some((p, _)) = st.propose(&domain, &c, &mut rng) else { break };
            let v = f(&p);
            st.observe(&p, v, &c);
        }
        assert!(st.f_bar <= 0.05, "{}", st.f_bar);
    }

    fn int_domain() -> UnitDomain {
        let spec = ProblemSpec::builder()
            .integer(0.0, 10.0)
            .categorical_count(3)
            .objective(|_| 0.0)
            .build()
            .unwrap();
        UnitDomain::new(&spec)
    }

    #[test]
    fn rounding_probabilities() {
        let domain = int_domain();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = [0.23, 0.5, 0.25, 0.25];
        let draws = 10_000;
        let mut down = 0;
        let mut first = 0;
        for _ in 0..draws {
            let y = round_point(&x, &domain, |_| 0.0, 1, &mut rng);
            if (y[0] * 10.0).round() == 2.0 {
                down += 1;
            }
            if y[1] == 1.0 {
                first += 1;
            }
        }
        assert!((down as f64 / draws as f64 - 0.7).abs() < 0.02);
        assert!((first as f64 / draws as f64 - 0.5).abs() < 0.02);
        let integral = [0.3, 0.0, 1.0, 0.0];
        assert_eq!(round_point(&integral, &domain, |_| 0.0, 5, &mut rng), integral.to_vec());
    }

    #[test]
    fn zero_block_rounds_uniformly() {
        let domain = int_domain();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = round_point(&[0.0, 0.0, 0.0, 0.0], &domain, |_| 0.0, 1, &mut rng);
        assert_eq!(y[1..].iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn categorical_problem_has_independent_reduced_sets() {
        let domain = int_domain();
        let c = RefineConfig::default();
        // Reduced dimension is 1 + 2 = 3, so four points are needed.
        let nodes = vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.1, 0.0, 1.0, 0.0],
            vec![0.2, 0.0, 0.0, 1.0],
            vec![0.5, 1.0, 0.0, 0.0],
        ];
        let st = RefinementState::init(&nodes, &[0.0, 1.0, 2.0, 3.0], &domain, &c).unwrap();
        assert_eq!(st.affine_rank(), 3);
    }
}

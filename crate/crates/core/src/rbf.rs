//! Radial basis function interpolation.
//!
//! The interpolant is `s(x) = sum_i lambda_i phi(||x - x_i||) + p(x)` where
//! the polynomial tail `p` has degree 1, 0 or none depending on the kernel.
//! With categorical variables in unary encoding and a degree-1 tail, the
//! last slot of each unary block duplicates the constant column, so those
//! tail columns are removed and the corresponding coefficients are fixed to
//! zero.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SolveMethod};
use crate::problem::{sq_dist, NODE_TOLERANCE};

/// Kernel family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbfFamily {
    Linear,
    Cubic,
    Multiquadric,
    ThinPlateSpline,
    Gaussian,
}

/// A kernel together with its shape parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbfKind {
    pub family: RbfFamily,
    /// Shape parameter; only read by multiquadric and gaussian kernels.
    pub gamma: f64,
}

pub const DEFAULT_MULTIQUADRIC_GAMMA: f64 = 0.1;
pub const DEFAULT_GAUSSIAN_GAMMA: f64 = 1.0;

impl RbfKind {
    pub const fn linear() -> Self {
        Self {
            family: RbfFamily::Linear,
            gamma: 0.0,
        }
    }

    pub const fn cubic() -> Self {
        Self {
            family: RbfFamily::Cubic,
            gamma: 0.0,
        }
    }

    pub const fn multiquadric() -> Self {
        Self {
            family: RbfFamily::Multiquadric,
            gamma: DEFAULT_MULTIQUADRIC_GAMMA,
        }
    }

    pub const fn thin_plate_spline() -> Self {
        Self {
            family: RbfFamily::ThinPlateSpline,
            gamma: 0.0,
        }
    }

    pub const fn gaussian() -> Self {
        Self {
            family: RbfFamily::Gaussian,
            gamma: DEFAULT_GAUSSIAN_GAMMA,
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    /// All kernels with default shape, in table order (also the tie-break
    /// order of model selection).
    pub const ALL: [RbfKind; 5] = [
        Self::linear(),
        Self::cubic(),
        Self::multiquadric(),
        Self::thin_plate_spline(),
        Self::gaussian(),
    ];

    /// Degree of the polynomial tail; -1 means no tail.
    pub fn degree(&self) -> i32 {
        match self.family {
            RbfFamily::Linear | RbfFamily::Multiquadric => 0,
            RbfFamily::Cubic | RbfFamily::ThinPlateSpline => 1,
            RbfFamily::Gaussian => -1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            RbfFamily::Linear => "linear",
            RbfFamily::Cubic => "cubic",
            RbfFamily::Multiquadric => "multiquadric",
            RbfFamily::ThinPlateSpline => "thin_plate_spline",
            RbfFamily::Gaussian => "gaussian",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "linear" => Self::linear(),
            "cubic" => Self::cubic(),
            "multiquadric" => Self::multiquadric(),
            "thin_plate" | "thin_plate_spline" => Self::thin_plate_spline(),
            "gaussian" => Self::gaussian(),
            _ => return None,
        })
    }

    /// `phi(r)` without the sign check.
    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        match self.family {
            RbfFamily::Linear => r,
            RbfFamily::Cubic => r * r * r,
            RbfFamily::Multiquadric => (r * r + self.gamma * self.gamma).sqrt(),
            RbfFamily::ThinPlateSpline => {
                if r > 0.0 {
                    r * r * r.ln()
                } else {
                    0.0
                }
            }
            RbfFamily::Gaussian => (-self.gamma * r * r).exp(),
        }
    }

    /// Number of tail columns for points of dimension `dim` with
    /// `eliminated` tail columns removed.
    pub fn tail_len(&self, dim: usize, eliminated: usize) -> usize {
        match self.degree() {
            1 => dim + 1 - eliminated,
            0 => 1,
            _ => 0,
        }
    }
}

/// Evaluates `phi(r)`; the thin plate spline takes its limit 0 at `r = 0`.
pub fn kernel_eval(kind: RbfKind, r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::NegativeRadius(r));
    }
    Ok(kind.phi(r))
}

/// Assembled interpolation system `[[Phi, P], [P^T, 0]] (lambda, alpha) = (F, 0)`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Tail columns removed from `P` (empty unless the tail has degree 1).
    pub eliminated_columns: Vec<usize>,
}

fn tail_row(kind: RbfKind, x: &[f64], eliminated: &[usize], out: &mut Vec<f64>) {
    out.clear();
    match kind.degree() {
        1 => {
            out.extend(
                x.iter()
                    .enumerate()
                    .filter(|(j, _)| !eliminated.contains(j))
                    .map(|(_, &v)| v),
            );
            out.push(1.0);
        }
        0 => out.push(1.0),
        _ => {}
    }
}

fn effective_eliminated(kind: RbfKind, eliminated: &[usize]) -> Vec<usize> {
    if kind.degree() == 1 {
        eliminated.to_vec()
    } else {
        Vec::new()
    }
}

fn check_distinct(nodes: &[Vec<f64>]) -> Result<()> {
    let tol2 = NODE_TOLERANCE * NODE_TOLERANCE;
    for i in 0..nodes.len() {
        for j in 0..i {
            if sq_dist(&nodes[i], &nodes[j]) <= tol2 {
                return Err(Error::DuplicateNode(j, i));
            }
        }
    }
    Ok(())
}

fn check_dims(nodes: &[Vec<f64>]) -> Result<usize> {
    let dim = nodes.first().map_or(0, Vec::len);
    for n in nodes {
        if n.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: n.len(),
            });
        }
    }
    Ok(dim)
}

/// Builds the (reduced) interpolation system for `nodes` with values
/// `values`. `eliminated` lists the unary-block columns to drop; it is
/// ignored unless the tail has degree 1.
pub fn assemble_system(
    kind: RbfKind,
    nodes: &[Vec<f64>],
    values: &[f64],
    eliminated: &[usize],
) -> Result<LinearSystem> {
    let dim = check_dims(nodes)?;
    if values.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    check_distinct(nodes)?;
    let elim = effective_eliminated(kind, eliminated);
    let k = nodes.len();
    let t = kind.tail_len(dim, elim.len());
    let m = k + t;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..k {
        a[(i, i)] = kind.phi(0.0);
        for j in 0..i {
            let v = kind.phi(sq_dist(&nodes[i], &nodes[j]).sqrt());
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut row = Vec::with_capacity(t);
    for (i, x) in nodes.iter().enumerate() {
        tail_row(kind, x, &elim, &mut row);
        for (c, &v) in row.iter().enumerate() {
            a[(i, k + c)] = v;
            a[(k + c, i)] = v;
        }
    }
    let mut rhs = DVector::zeros(m);
    rhs.rows_mut(0, k).copy_from_slice(values);
    Ok(LinearSystem {
        matrix: a,
        rhs,
        eliminated_columns: elim,
    })
}

/// Systems whose least-squares residual exceeds this multiple of
/// `max(1, ||F||_inf)` are declared unsolvable.
pub const UNSOLVABLE_RESIDUAL: f64 = 1e-3;

/// A fitted surrogate model.
#[derive(Clone, Debug)]
pub struct Interpolant {
    pub kind: RbfKind,
    dim: usize,
    /// Row-major copy of the nodes.
    flat_nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Tail coefficients: `dim` linear terms followed by the constant for
    /// degree 1, just the constant for degree 0, empty otherwise. Entries at
    /// eliminated columns are zero.
    pub alpha: Vec<f64>,
    pub fit_method: SolveMethod,
    pub eliminated_columns: Vec<usize>,
    /// Infinity norm of the residual of the solved system.
    pub residual: f64,
}

/// Fits an interpolant. Uses a direct solve when the (reduced) system is
/// well conditioned, the minimum-norm least-squares solution otherwise.
pub fn fit(kind: RbfKind, nodes: &[Vec<f64>], values: &[f64], eliminated: &[usize]) -> Result<Interpolant> {
    if nodes.is_empty() {
        return Err(Error::InvalidPoint("no interpolation nodes".into()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(i));
    }
    let sys = assemble_system(kind, nodes, values, eliminated)?;
    let sol = linalg::solve_symmetric(&sys.matrix, &sys.rhs);
    let fnorm = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if !(sol.residual <= UNSOLVABLE_RESIDUAL * fnorm) {
        return Err(Error::UnsolvableSystem);
    }
    let k = nodes.len();
    let dim = nodes[0].len();
    let lambda = sol.x.rows(0, k).iter().copied().collect();
    let reduced_tail: Vec<f64> = sol.x.rows(k, sol.x.len() - k).iter().copied().collect();
    let alpha = expand_tail(kind, dim, &sys.eliminated_columns, &reduced_tail);
    Ok(Interpolant {
        kind,
        dim,
        flat_nodes: nodes.iter().flatten().copied().collect(),
        values: values.to_vec(),
        lambda,
        alpha,
        fit_method: sol.method,
        eliminated_columns: sys.eliminated_columns,
        residual: sol.residual,
    })
}

/// Inserts zeros at eliminated columns.
fn expand_tail(kind: RbfKind, dim: usize, eliminated: &[usize], reduced: &[f64]) -> Vec<f64> {
    if kind.degree() != 1 {
        return reduced.to_vec();
    }
    let mut out = Vec::with_capacity(dim + 1);
    let mut it = reduced.iter();
    for j in 0..dim {
        if eliminated.contains(&j) {
            out.push(0.0);
        } else {
            out.push(*it.next().unwrap());
        }
    }
    out.push(*it.next().unwrap());
    out
}

impl Interpolant {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.flat_nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i).to_vec()).collect()
    }

    fn tail_value(&self, x: &[f64]) -> f64 {
        match self.kind.degree() {
            1 => {
                let lin: f64 = self.alpha[..self.dim].iter().zip(x).map(|(a, v)| a * v).sum();
                lin + self.alpha[self.dim]
            }
            0 => self.alpha[0],
            _ => 0.0,
        }
    }

    /// Value of the surrogate at `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_with_distance(x).0
    }

    /// Surrogate value and distance from `x` to the closest node.
    pub fn predict_with_distance(&self, x: &[f64]) -> (f64, f64) {
        debug_assert_eq!(x.len(), self.dim);
        let mut s = 0.0;
        let mut dmin = f64::INFINITY;
        for (i, node) in self.flat_nodes.chunks_exact(self.dim.max(1)).enumerate() {
            let d2 = sq_dist(x, node);
            dmin = dmin.min(d2);
            s += self.lambda[i] * self.kind.phi(d2.sqrt());
        }
        (s + self.tail_value(x), dmin.sqrt())
    }
}

/// Result of a bumpiness computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bumpiness {
    Value(f64),
    /// The query coincides with an existing node.
    AtNode,
}

/// Coefficient of the RBF centred at `y` in the interpolant to
/// `nodes + {y}` with values `(0, ..., 0, 1)`, obtained by solving the
/// augmented system.
pub fn bumpiness_mu(kind: RbfKind, nodes: &[Vec<f64>], y: &[f64], eliminated: &[usize]) -> Result<Bumpiness> {
    if nodes
        .iter()
        .any(|n| sq_dist(n, y) <= NODE_TOLERANCE * NODE_TOLERANCE)
    {
        return Ok(Bumpiness::AtNode);
    }
    let mut aug = nodes.to_vec();
    aug.push(y.to_vec());
    let mut values = vec![0.0; nodes.len()];
    values.push(1.0);
    let sys = assemble_system(kind, &aug, &values, eliminated)?;
    let sol = linalg::solve_symmetric(&sys.matrix, &sys.rhs);
    if !(sol.residual <= UNSOLVABLE_RESIDUAL) {
        return Err(Error::UnsolvableSystem);
    }
    Ok(Bumpiness::Value(sol.x[nodes.len()]))
}

/// Fast bumpiness evaluation for many queries against fixed nodes, via the
/// Schur complement `mu = 1 / (phi(0) - u^T A^{-1} u)` of the augmented
/// system, where `A` is the node system and `u` the column of `y`.
pub struct BumpinessOracle {
    kind: RbfKind,
    nodes: Vec<Vec<f64>>,
    eliminated: Vec<usize>,
    inverse: DMatrix<f64>,
}

impl BumpinessOracle {
    pub fn new(kind: RbfKind, nodes: &[Vec<f64>], eliminated: &[usize]) -> Result<Self> {
        let zeros = vec![0.0; nodes.len()];
        let sys = assemble_system(kind, nodes, &zeros, eliminated)?;
        Ok(Self {
            kind,
            nodes: nodes.to_vec(),
            eliminated: sys.eliminated_columns,
            inverse: linalg::symmetric_inverse(&sys.matrix),
        })
    }

    pub fn mu(&self, y: &[f64]) -> Bumpiness {
        let k = self.nodes.len();
        let m = self.inverse.nrows();
        let mut u = DVector::zeros(m);
        for (i, n) in self.nodes.iter().enumerate() {
            let d2 = sq_dist(n, y);
            if d2 <= NODE_TOLERANCE * NODE_TOLERANCE {
                return Bumpiness::AtNode;
            }
            u[i] = self.kind.phi(d2.sqrt());
        }
        let mut row = Vec::new();
        tail_row(self.kind, y, &self.eliminated, &mut row);
        for (c, v) in row.into_iter().enumerate() {
            u[k + c] = v;
        }
        let quad = u.dot(&(&self.inverse * &u));
        Bumpiness::Value(1.0 / (self.kind.phi(0.0) - quad))
    }
}

/// Clips values above the median down to the median when the largest value
/// exceeds `1e3 * |median|`; returns the input unchanged otherwise.
pub fn clip_values(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let max = sorted[n - 1];
    if max > 1e3 * median.abs() && max > median {
        values.iter().map(|&v| v.min(median)).collect()
    } else {
        values.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_nodes(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Vec<f64>> {
        (0..k).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_eval(RbfKind::cubic(), 2.0).unwrap(), 8.0);
        assert_eq!(kernel_eval(RbfKind::thin_plate_spline(), 1.0).unwrap(), 0.0);
        assert_eq!(kernel_eval(RbfKind::thin_plate_spline(), 0.0).unwrap(), 0.0);
        assert_eq!(kernel_eval(RbfKind::gaussian(), 0.0).unwrap(), 1.0);
        assert_eq!(kernel_eval(RbfKind::multiquadric().with_gamma(1.0), 0.0).unwrap(), 1.0);
        assert!(matches!(
            kernel_eval(RbfKind::linear(), -1.0),
            Err(Error::NegativeRadius(_))
        ));
    }

    #[test]
    fn tail_degrees_follow_kernel_table() {
        let d: Vec<i32> = RbfKind::ALL.iter().map(RbfKind::degree).collect();
        assert_eq!(d, vec![0, 1, 0, 1, -1]);
    }

    #[test]
    fn system_dimensions() {
        let nodes = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let f = [1.0, 2.0, 3.0];
        let s = assemble_system(RbfKind::cubic(), &nodes, &f, &[]).unwrap();
        assert_eq!(s.matrix.shape(), (6, 6));
        let s = assemble_system(RbfKind::gaussian(), &nodes, &f, &[]).unwrap();
        assert_eq!(s.matrix.shape(), (3, 3));
        let s = assemble_system(RbfKind::linear(), &nodes, &f, &[]).unwrap();
        assert_eq!(s.matrix.shape(), (4, 4));
    }

    #[test]
    fn reduced_system_for_one_categorical() {
        // n_r = 2 plus one categorical with three values: n = 5.
        let nodes = vec![
            vec![0.1, 0.2, 1.0, 0.0, 0.0],
            vec![0.5, 0.9, 0.0, 1.0, 0.0],
            vec![0.7, 0.3, 0.0, 0.0, 1.0],
        ];
        let s = assemble_system(RbfKind::cubic(), &nodes, &[1.0, 2.0, 3.0], &[4]).unwrap();
        assert_eq!(s.matrix.shape(), (8, 8));
        assert_eq!(s.eliminated_columns, vec![4]);
        let s = assemble_system(RbfKind::linear(), &nodes, &[1.0, 2.0, 3.0], &[4]).unwrap();
        assert!(s.eliminated_columns.is_empty());
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let nodes = vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![0.0, 0.0]];
        assert!(matches!(
            assemble_system(RbfKind::cubic(), &nodes, &[1.0, 2.0, 3.0], &[]),
            Err(Error::DuplicateNode(0, 2))
        ));
    }

    #[test]
    fn single_gaussian_node() {
        let m = fit(RbfKind::gaussian(), &[vec![0.3, 0.3]], &[7.0], &[]).unwrap();
        assert_eq!(m.lambda, vec![7.0]);
        assert!(m.alpha.is_empty());
        assert_eq!(m.predict(&[0.3, 0.3]), 7.0);
    }

    #[test]
    fn affine_data_reproduced_by_linear_tail() {
        let nodes = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let a = [2.0, -1.0, 0.5];
        let b = 3.0;
        let f: Vec<f64> = nodes
            .iter()
            .map(|x| x.iter().zip(&a).map(|(u, v)| u * v).sum::<f64>() + b)
            .collect();
        for kind in [RbfKind::cubic(), RbfKind::thin_plate_spline()] {
            let m = fit(kind, &nodes, &f, &[]).unwrap();
            assert_eq!(m.fit_method, SolveMethod::Direct);
            assert!(m.lambda.iter().all(|l| l.abs() < 1e-8), "{:?}", m.lambda);
            for (got, want) in m.alpha.iter().zip(a.iter().chain([b].iter())) {
                assert!((got - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn thin_plate_interpolates_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nodes = random_nodes(&mut rng, 5, 3);
        let f: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m = fit(RbfKind::thin_plate_spline(), &nodes, &f, &[]).unwrap();
        // Independent residual check: rebuild the system and multiply.
        let sys = assemble_system(RbfKind::thin_plate_spline(), &nodes, &f, &[]).unwrap();
        let mut coef = m.lambda.clone();
        coef.extend(&m.alpha);
        let r = &sys.matrix * DVector::from_vec(coef) - &sys.rhs;
        assert!(r.amax() < 1e-6);
        for (x, fi) in nodes.iter().zip(&f) {
            assert!((m.predict(x) - fi).abs() < 1e-6);
        }
    }

    #[test]
    fn too_few_points_use_least_squares() {
        let nodes = vec![vec![0.2, 0.4], vec![0.8, 0.1]];
        let m = fit(RbfKind::cubic(), &nodes, &[1.0, -2.0], &[]).unwrap();
        assert_eq!(m.fit_method, SolveMethod::LeastSquares);
        assert!((m.predict(&nodes[0]) - 1.0).abs() < 1e-8);
        assert!((m.predict(&nodes[1]) + 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_values_rejected() {
        let nodes = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            fit(RbfKind::linear(), &nodes, &[1.0, f64::NAN], &[]),
            Err(Error::NonFiniteValue(1))
        ));
    }

    #[test]
    fn near_duplicate_nodes_with_conflicting_values_are_unsolvable() {
        let nodes = vec![vec![0.5, 0.5], vec![0.5, 0.5 + 1e-9], vec![0.1, 0.9]];
        let r = fit(RbfKind::gaussian(), &nodes, &[0.0, 10.0, 1.0], &[]);
        assert!(matches!(r, Err(Error::UnsolvableSystem)), "{r:?}");
    }

    #[test]
    fn zero_lambda_model_is_affine() {
        let nodes = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let f: Vec<f64> = nodes.iter().map(|x| 2.0 * x[0] - x[1] + 0.5).collect();
        let m = fit(RbfKind::cubic(), &nodes, &f, &[]).unwrap();
        let q = [0.3, 0.8];
        assert!((m.predict(&q) - (2.0 * 0.3 - 0.8 + 0.5)).abs() < 1e-10);
    }

    #[test]
    fn mu_single_gaussian_node_closed_form() {
        let r: f64 = 0.7;
        let y = [r, 0.0];
        let expected = 1.0 / (1.0 - (-2.0 * r * r).exp());
        let Bumpiness::Value(mu) = bumpiness_mu(RbfKind::gaussian(), &[vec![0.0, 0.0]], &y, &[]).unwrap() else {
            panic!("unexpected at-node");
        };
        assert!((mu - expected).abs() < 1e-10);
        let oracle = BumpinessOracle::new(RbfKind::gaussian(), &[vec![0.0, 0.0]], &[]).unwrap();
        let Bumpiness::Value(fast) = oracle.mu(&y) else { panic!() };
        assert!((fast - expected).abs() < 1e-10);
    }

    #[test]
    fn mu_at_node_is_signalled() {
        let nodes = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(
            bumpiness_mu(RbfKind::cubic(), &nodes, &[1.0, 1.0], &[]).unwrap(),
            Bumpiness::AtNode
        );
    }

    #[test]
    fn schur_route_matches_augmented_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in RbfKind::ALL {
            let nodes = random_nodes(&mut rng, 8, 3);
            let oracle = BumpinessOracle::new(kind, &nodes, &[]).unwrap();
            for _ in 0..10 {
                let y: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
                let (Bumpiness::Value(a), Bumpiness::Value(b)) =
                    (bumpiness_mu(kind, &nodes, &y, &[]).unwrap(), oracle.mu(&y))
                else {
                    panic!()
                };
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{kind:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn clipping_only_for_wide_ranges() {
        assert_eq!(clip_values(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(clip_values(&[1.0, 2.0, 1e5]), vec![1.0, 2.0, 2.0]);
        assert_eq!(clip_values(&[-5.0, -4.0, -1.0]), vec![-5.0, -4.0, -1.0]);
    }
}

//! Dense solvers for the symmetric interpolation systems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Systems whose 1-norm condition estimate exceeds this are solved in the
/// least-squares sense.
pub const COND_LIMIT: f64 = 1e12;

/// How a linear system was solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Direct,
    LeastSquares,
}

/// Solution of `A x = b` for symmetric `A`.
pub struct Solution {
    pub x: DVector<f64>,
    pub method: SolveMethod,
    /// Infinity norm of `A x - b`.
    pub residual: f64,
}

/// Solves a symmetric system: LU with partial pivoting when the condition
/// estimate is below [`COND_LIMIT`], otherwise the minimum-norm
/// least-squares solution.
pub fn solve_symmetric(a: &DMatrix<f64>, b: &DVector<f64>) -> Solution {
    if let Some(x) = direct_solve(a, b) {
        let residual = residual_inf(a, &x, b);
        return Solution {
            x,
            method: SolveMethod::Direct,
            residual,
        };
    }
    let x = min_norm_least_squares(a, b);
    let residual = residual_inf(a, &x, b);
    Solution {
        x,
        method: SolveMethod::LeastSquares,
        residual,
    }
}

fn direct_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    if u.diagonal().iter().any(|d| *d == 0.0 || !d.is_finite()) {
        return None;
    }
    let inv_norm = inverse_norm1_estimate(|v| lu.solve(v), a.nrows())?;
    if norm1(a) * inv_norm >= COND_LIMIT {
        return None;
    }
    let x = lu.solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Hager's estimator of `||A^{-1}||_1`. `solve` applies `A^{-1}`; the
/// transpose solve is the same operation because `A` is symmetric.
fn inverse_norm1_estimate<F>(solve: F, n: usize) -> Option<f64>
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>>,
{
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = solve(&x)?;
        estimate = y.lp_norm(1);
        if !estimate.is_finite() {
            return None;
        }
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve(&xi)?;
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    Some(estimate)
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.lp_norm(1))
        .fold(0.0, f64::max)
}

fn residual_inf(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a * x - b).amax()
}

/// Eigenvalues below this fraction of the largest are treated as zero.
const PINV_RTOL: f64 = 1e-12;

/// Moore-Penrose pseudo-inverse of a symmetric matrix.
pub fn symmetric_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.amax();
    let tol = lmax * PINV_RTOL;
    let inv: DVector<f64> = eig
        .eigenvalues
        .map(|l| if l.abs() > tol { 1.0 / l } else { 0.0 });
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= inv[j];
    }
    scaled * q.transpose()
}

/// Minimum-norm least-squares solution of a symmetric system.
pub fn min_norm_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.nrows() == 0 {
        return DVector::zeros(0);
    }
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.amax();
    let tol = lmax * PINV_RTOL;
    let q = &eig.eigenvectors;
    let coeffs = q.tr_mul(b);
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, l)| if l.abs() > tol { c / l } else { 0.0 }),
    );
    q * scaled
}

/// Inverse when the system is well conditioned, pseudo-inverse otherwise.
pub fn symmetric_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let lu = a.clone().lu();
    let well_conditioned = lu.u().diagonal().iter().all(|d| *d != 0.0 && d.is_finite())
        && inverse_norm1_estimate(|v| lu.solve(v), n)
            .is_some_and(|e| norm1(a) * e < COND_LIMIT);
    if well_conditioned {
        if let Some(inv) = lu.try_inverse() {
            return inv;
        }
    }
    symmetric_pinv(a)
}

/// Smallest singular value of `m` (0 for empty matrices).
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().min()
}

//! Initial experimental design.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{sq_dist, ExtendedPoint, OriginalPoint, ProblemSpec, NODE_TOLERANCE};

/// Number of random latin hypercubes among which the maximin one is kept.
pub const MAXIMIN_CANDIDATES: usize = 50;
pub const MAX_REGENERATION_ATTEMPTS: usize = 20;
/// Singular values of the tail matrix below this count as zero.
pub const RANK_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InitConfig {
    pub threads: usize,
    pub max_regeneration_attempts: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            threads: 1,
            max_regeneration_attempts: MAX_REGENERATION_ATTEMPTS,
        }
    }
}

/// Size of the initial design for an `n`-dimensional problem.
pub fn initial_sample_count(n: usize, threads: usize) -> usize {
    let m = (n + 1) as f64;
    // f64::round breaks ties away from zero.
    let k = if threads <= 1 {
        if n <= 20 {
            (0.5 * m).round()
        } else {
            (0.4 * m).round()
        }
    } else if n <= 20 {
        m
    } else if n <= 50 {
        (0.75 * m).round()
    } else {
        (0.5 * m).round()
    };
    k as usize
}

/// Stratified values for one variable. `levels` is `None` for continuous
/// variables, otherwise the number of grid values starting at `lo`.
fn stratify<R: Rng + ?Sized>(
    lo: f64,
    hi: f64,
    levels: Option<usize>,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..count).collect();
    perm.shuffle(rng);
    perm.into_iter()
        .map(|bin| {
            let u = (bin as f64 + rng.random::<f64>()) / count as f64;
            match levels {
                None => lo + u * (hi - lo),
                Some(m) => {
                    let v = (u * m as f64).floor().min(m as f64 - 1.0);
                    lo + v
                }
            }
        })
        .collect()
}

fn one_lhd<R: Rng + ?Sized>(spec: &ProblemSpec, count: usize, rng: &mut R) -> Vec<OriginalPoint> {
    let (lower, upper) = spec.numeric_bounds();
    let mut columns = Vec::with_capacity(spec.n_vars());
    for j in 0..lower.len() {
        let levels = (j >= spec.n_r()).then(|| (upper[j] - lower[j]) as usize + 1);
        columns.push(stratify(lower[j], upper[j], levels, count, rng));
    }
    for c in spec.categories() {
        columns.push(stratify(1.0, c.len() as f64, Some(c.len()), count, rng));
    }
    (0..count)
        .map(|i| OriginalPoint(columns.iter().map(|c| c[i]).collect()))
        .collect()
}

/// Smallest pairwise distance of a point set (`+inf` for fewer than two).
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            best = best.min(sq_dist(&points[i], &points[j]));
        }
    }
    best.sqrt()
}

/// Maximin latin hypercube of `count` points. Distances are measured in the
/// unit-scaled extended space. Designs containing coincident points are
/// discarded; if every candidate of every attempt has duplicates the call
/// fails.
pub fn latin_hypercube<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ExtendedPoint>> {
    latin_hypercube_with(spec, count, MAXIMIN_CANDIDATES, MAX_REGENERATION_ATTEMPTS, rng)
}

pub fn latin_hypercube_with<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    count: usize,
    candidates: usize,
    attempts: usize,
    rng: &mut R,
) -> Result<Vec<ExtendedPoint>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    for _ in 0..attempts.max(1) {
        let mut best: Option<(f64, Vec<ExtendedPoint>)> = None;
        for _ in 0..candidates.max(1) {
            let design: Vec<ExtendedPoint> = one_lhd(spec, count, rng)
                .iter()
                .map(|p| spec.encode(p).expect("stratified values are feasible"))
                .collect();
            let unit: Vec<Vec<f64>> = design.iter().map(|x| spec.to_unit(x)).collect();
            let d = min_pairwise_distance(&unit);
            if d <= NODE_TOLERANCE {
                continue;
            }
            if best.as_ref().is_none_or(|(b, _)| d > *b) {
                best = Some((d, design));
            }
        }
        if let Some((_, design)) = best {
            return Ok(design);
        }
    }
    Err(Error::Design(format!(
        "could not build {count} distinct design points"
    )))
}

/// Tail matrix `P` of the reduced system: rows `(x_i without eliminated
/// columns, 1)`.
pub fn tail_matrix(points: &[Vec<f64>], eliminated: &[usize]) -> DMatrix<f64> {
    let dim = points.first().map_or(0, Vec::len);
    let cols = dim - eliminated.len() + 1;
    let mut p = DMatrix::zeros(points.len(), cols);
    for (i, x) in points.iter().enumerate() {
        let mut c = 0;
        for (j, &v) in x.iter().enumerate() {
            if !eliminated.contains(&j) {
                p[(i, c)] = v;
                c += 1;
            }
        }
        p[(i, c)] = 1.0;
    }
    p
}

/// Whether the reduced tail matrix has full rank (full column rank when
/// there are at least as many points as columns, full row rank otherwise).
pub fn affine_rank_ok(points: &[Vec<f64>], eliminated: &[usize]) -> bool {
    if points.is_empty() {
        return false;
    }
    linalg::min_singular_value(&tail_matrix(points, eliminated)) > RANK_TOLERANCE
}

/// Initial design: a maximin latin hypercube, regenerated while the reduced
/// tail matrix is rank deficient (only relevant for kernels with a linear
/// tail, which is what `check_rank` requests).
pub fn initial_design<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    count: usize,
    check_rank: bool,
    config: &InitConfig,
    rng: &mut R,
) -> Result<Vec<ExtendedPoint>> {
    let eliminated = spec.layout().eliminated_columns();
    let mut last_err = None;
    for _ in 0..config.max_regeneration_attempts.max(1) {
        match latin_hypercube(spec, count, rng) {
            Ok(design) => {
                if !check_rank {
                    return Ok(design);
                }
                let unit: Vec<Vec<f64>> = design.iter().map(|x| spec.to_unit(x)).collect();
                if affine_rank_ok(&unit, &eliminated) {
                    return Ok(design);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::Design(format!(
            "no affinely independent design after {} attempts",
            config.max_regeneration_attempts
        ))
    }))
}

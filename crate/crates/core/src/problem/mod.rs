//! Mixed-variable problem model.
//!
//! A problem has `n_r` continuous variables, `n_d` integer variables and
//! `n_c` categorical variables. Points are handled in two representations:
//!
//! * the *original space*, where the categorical variable `h` is an index
//!   in `1..=m_h` into its (ordered) value list;
//! * the *extended space*, where each categorical variable with more than
//!   two values becomes a unary (one-hot) block of `m_h` slots, and each
//!   two-valued categorical variable becomes a single 0/1 slot.
//!
//! Surrogate models and search heuristics live in the extended space; the
//! objective is always called with an original-space point.

pub mod file;

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Black-box objective. Receives an original-space point.
pub type Objective = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Two points closer than this (in unit-scaled extended space) are treated
/// as the same interpolation node.
pub const NODE_TOLERANCE: f64 = 1e-10;

macro_rules! point_newtype {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub Vec<f64>);

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl $name {
            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }
    };
}

point_newtype!(OriginalPoint);
point_newtype!(ExtendedPoint);

/// What a single extended-space coordinate represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Continuous,
    Integer,
    /// Two-valued categorical variable `var`, stored as one 0/1 slot.
    Binary { var: usize },
    /// Position `pos` inside the unary block of categorical variable `var`.
    Unary { var: usize, pos: usize },
}

/// Placement of one categorical variable in extended space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CategoryBlock {
    /// First extended-space coordinate of the block.
    pub offset: usize,
    /// Number of values `m_h`.
    pub size: usize,
    /// `m_h == 2`: stored as a single slot.
    pub binary: bool,
}

impl CategoryBlock {
    pub fn width(&self) -> usize {
        if self.binary {
            1
        } else {
            self.size
        }
    }
}

/// Index arithmetic between the original and the extended representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n_r: usize,
    pub n_d: usize,
    pub blocks: Vec<CategoryBlock>,
    dim: usize,
}

impl Layout {
    pub fn new(n_r: usize, n_d: usize, category_sizes: &[usize]) -> Self {
        let mut offset = n_r + n_d;
        let blocks = category_sizes
            .iter()
            .map(|&size| {
                let block = CategoryBlock {
                    offset,
                    size,
                    binary: size == 2,
                };
                offset += block.width();
                block
            })
            .collect();
        Self {
            n_r,
            n_d,
            blocks,
            dim: offset,
        }
    }

    /// Number of continuous plus integer variables.
    pub fn n_numeric(&self) -> usize {
        self.n_r + self.n_d
    }

    pub fn n_c(&self) -> usize {
        self.blocks.len()
    }

    /// Original-space dimension `n_r + n_d + n_c`.
    pub fn n_vars(&self) -> usize {
        self.n_numeric() + self.n_c()
    }

    /// Extended-space dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slot(&self, j: usize) -> Slot {
        if j < self.n_r {
            return Slot::Continuous;
        }
        if j < self.n_numeric() {
            return Slot::Integer;
        }
        for (var, b) in self.blocks.iter().enumerate() {
            if j >= b.offset && j < b.offset + b.width() {
                return if b.binary {
                    Slot::Binary { var }
                } else {
                    Slot::Unary {
                        var,
                        pos: j - b.offset,
                    }
                };
            }
        }
        panic!("coordinate {j} outside extended dimension {}", self.dim);
    }

    /// Tail columns removed from the reduced interpolation system: the last
    /// slot of every unary block. Binary slots are kept.
    pub fn eliminated_columns(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| !b.binary)
            .map(|b| b.offset + b.size - 1)
            .collect()
    }

    /// True for coordinates that must take integral values.
    pub fn is_discrete(&self, j: usize) -> bool {
        j >= self.n_r
    }

    /// True when every variable is integer or categorical.
    pub fn is_fully_discrete(&self) -> bool {
        self.n_r == 0
    }
}

/// Definition of a mixed-variable box-constrained black-box problem.
#[derive(Clone)]
pub struct ProblemSpec {
    /// Bounds of the continuous then integer variables.
    lower: Vec<f64>,
    upper: Vec<f64>,
    categories: Vec<Vec<String>>,
    layout: Layout,
    objective: Objective,
    thread_safe: bool,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("n_r", &self.layout.n_r)
            .field("n_d", &self.layout.n_d)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("categories", &self.categories)
            .field("thread_safe", &self.thread_safe)
            .finish()
    }
}

/// Incremental construction of a [`ProblemSpec`].
#[derive(Default)]
pub struct ProblemBuilder {
    continuous: Vec<(f64, f64)>,
    integer: Vec<(f64, f64)>,
    categories: Vec<Vec<String>>,
    objective: Option<Objective>,
    thread_safe: bool,
}

impl ProblemBuilder {
    pub fn continuous(mut self, lower: f64, upper: f64) -> Self {
        self.continuous.push((lower, upper));
        self
    }

    pub fn integer(mut self, lower: f64, upper: f64) -> Self {
        self.integer.push((lower, upper));
        self
    }

    pub fn categorical<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        self.categories
            .push(labels.into_iter().map(Into::into).collect());
        self
    }

    /// Adds an unlabeled categorical variable with `m` values.
    pub fn categorical_count(self, m: usize) -> Self {
        self.categorical((1..=m).map(|v| v.to_string()))
    }

    pub fn objective<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.objective = Some(Arc::new(f));
        self
    }

    pub fn objective_arc(mut self, f: Objective) -> Self {
        self.objective = Some(f);
        self
    }

    /// Declares that the objective may be called concurrently.
    pub fn thread_safe(mut self, yes: bool) -> Self {
        self.thread_safe = yes;
        self
    }

    pub fn build(self) -> Result<ProblemSpec> {
        let objective = self
            .objective
            .ok_or_else(|| Error::InvalidProblem("missing objective".into()))?;
        let n_r = self.continuous.len();
        let n_d = self.integer.len();
        let (lower, upper): (Vec<f64>, Vec<f64>) =
            self.continuous.iter().chain(&self.integer).copied().unzip();
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "variable {j} has non-finite bounds"
                )));
            }
            if lo > hi {
                return Err(Error::InvalidProblem(format!(
                    "variable {j}: lower bound {lo} exceeds upper bound {hi}"
                )));
            }
            if j >= n_r && (lo.fract() != 0.0 || hi.fract() != 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "integer variable {j} has non-integral bounds [{lo}, {hi}]"
                )));
            }
        }
        for (h, labels) in self.categories.iter().enumerate() {
            if labels.len() < 2 {
                return Err(Error::InvalidProblem(format!(
                    "categorical variable {h} needs at least two values"
                )));
            }
        }
        let sizes: Vec<usize> = self.categories.iter().map(Vec::len).collect();
        if n_r + n_d + sizes.len() == 0 {
            return Err(Error::InvalidProblem("problem has no variables".into()));
        }
        Ok(ProblemSpec {
            lower,
            upper,
            layout: Layout::new(n_r, n_d, &sizes),
            categories: self.categories,
            objective,
            thread_safe: self.thread_safe,
        })
    }
}

impl ProblemSpec {
    pub fn builder() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_r(&self) -> usize {
        self.layout.n_r
    }

    pub fn n_d(&self) -> usize {
        self.layout.n_d
    }

    pub fn n_c(&self) -> usize {
        self.layout.n_c()
    }

    pub fn n_vars(&self) -> usize {
        self.layout.n_vars()
    }

    /// Extended-space dimension.
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn categories(&self) -> &[Vec<String>] {
        &self.categories
    }

    /// Bounds of continuous and integer variables.
    pub fn numeric_bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn is_thread_safe(&self) -> bool {
        self.thread_safe
    }

    /// Calls the objective at an original-space point.
    pub fn evaluate(&self, x: &OriginalPoint) -> f64 {
        (self.objective)(x)
    }

    /// Original-space lower bounds `x^{o,L}`.
    pub fn original_lower(&self) -> Vec<f64> {
        let mut v = self.lower.clone();
        v.extend(std::iter::repeat_n(1.0, self.n_c()));
        v
    }

    /// Original-space upper bounds `x^{o,U}`.
    pub fn original_upper(&self) -> Vec<f64> {
        let mut v = self.upper.clone();
        v.extend(self.categories.iter().map(|c| c.len() as f64));
        v
    }

    /// Extended-space lower bounds `x^{e,L}`.
    pub fn extended_lower(&self) -> Vec<f64> {
        let mut v = self.lower.clone();
        v.resize(self.dim(), 0.0);
        v
    }

    /// Extended-space upper bounds `x^{e,U}`.
    pub fn extended_upper(&self) -> Vec<f64> {
        let mut v = self.upper.clone();
        v.resize(self.dim(), 1.0);
        v
    }

    /// Label of the categorical value selected by an original-space index.
    pub fn category_label(&self, var: usize, index: f64) -> Option<&str> {
        let i = index as usize;
        (i >= 1 && index.fract() == 0.0)
            .then(|| self.categories.get(var)?.get(i - 1).map(String::as_str))
            .flatten()
    }

    /// Checks that `p` is a valid original-space point.
    pub fn check_original(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: p.len(),
            });
        }
        let lo = self.original_lower();
        let hi = self.original_upper();
        for (j, &v) in p.iter().enumerate() {
            if !(v >= lo[j] && v <= hi[j]) {
                return Err(Error::InvalidPoint(format!(
                    "coordinate {j} = {v} outside [{}, {}]",
                    lo[j], hi[j]
                )));
            }
            if j >= self.n_r() && v.fract() != 0.0 {
                return Err(Error::InvalidPoint(format!(
                    "coordinate {j} = {v} must be integral"
                )));
            }
        }
        Ok(())
    }

    /// Checks that `x` is a valid extended-space point.
    pub fn check_extended(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for j in 0..self.layout.n_numeric() {
            let v = x[j];
            if !(v >= self.lower[j] && v <= self.upper[j]) {
                return Err(Error::InvalidPoint(format!(
                    "coordinate {j} = {v} outside [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
            if j >= self.n_r() && v.fract() != 0.0 {
                return Err(Error::InvalidPoint(format!(
                    "coordinate {j} = {v} must be integral"
                )));
            }
        }
        for (h, b) in self.layout.blocks.iter().enumerate() {
            let slots = &x[b.offset..b.offset + b.width()];
            if slots.iter().any(|&s| s != 0.0 && s != 1.0) {
                return Err(Error::InvalidPoint(format!(
                    "categorical block {h} has non-binary entries {slots:?}"
                )));
            }
            if !b.binary && slots.iter().sum::<f64>() != 1.0 {
                return Err(Error::InvalidPoint(format!(
                    "unary block {h} does not sum to one: {slots:?}"
                )));
            }
        }
        Ok(())
    }

    /// Maps an original-space point to its extended-space representation.
    pub fn encode(&self, p: &OriginalPoint) -> Result<ExtendedPoint> {
        self.check_original(p)?;
        let nn = self.layout.n_numeric();
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&p[..nn]);
        for (h, b) in self.layout.blocks.iter().enumerate() {
            let v = p[nn + h] as usize;
            if b.binary {
                x.push((v - 1) as f64);
            } else {
                x.extend((1..=b.size).map(|i| if i == v { 1.0 } else { 0.0 }));
            }
        }
        Ok(ExtendedPoint(x))
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, x: &ExtendedPoint) -> Result<OriginalPoint> {
        self.check_extended(x)?;
        let nn = self.layout.n_numeric();
        let mut p = x[..nn].to_vec();
        for b in &self.layout.blocks {
            let slots = &x[b.offset..b.offset + b.width()];
            let v = if b.binary {
                slots[0] + 1.0
            } else {
                (slots.iter().position(|&s| s == 1.0).unwrap() + 1) as f64
            };
            p.push(v);
        }
        Ok(OriginalPoint(p))
    }

    /// One uniform draw over the original-space box.
    pub fn sample_original<R: Rng + ?Sized>(&self, rng: &mut R) -> OriginalPoint {
        let mut p = Vec::with_capacity(self.n_vars());
        for j in 0..self.layout.n_numeric() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let v = if j < self.n_r() {
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            } else {
                rng.random_range(lo as i64..=hi as i64) as f64
            };
            p.push(v);
        }
        for c in &self.categories {
            p.push(rng.random_range(1..=c.len()) as f64);
        }
        OriginalPoint(p)
    }

    /// Draws `count` points uniformly in the original space and encodes them.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<ExtendedPoint> {
        (0..count)
            .map(|_| {
                self.encode(&self.sample_original(rng))
                    .expect("uniform samples are valid")
            })
            .collect()
    }

    /// Affine map of numeric coordinates onto `[0, 1]`; categorical slots
    /// are left untouched.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        let nn = self.layout.n_numeric();
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                if j < nn {
                    let w = self.upper[j] - self.lower[j];
                    if w > 0.0 {
                        (v - self.lower[j]) / w
                    } else {
                        0.0
                    }
                } else {
                    v
                }
            })
            .collect()
    }

    /// Inverse of [`to_unit`](Self::to_unit). Integer coordinates are
    /// rounded to the nearest grid value.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        let nn = self.layout.n_numeric();
        u.iter()
            .enumerate()
            .map(|(j, &v)| {
                if j < nn {
                    let y = self.lower[j] + v * (self.upper[j] - self.lower[j]);
                    if j >= self.n_r() {
                        y.round()
                    } else {
                        y
                    }
                } else {
                    v
                }
            })
            .collect()
    }

    /// Nearest feasible extended point to a fractional vector: numeric
    /// coordinates are clamped (integers rounded), each unary block goes to
    /// the closest basis vector in l1 distance, binary slots round to 0/1.
    pub fn project_feasible(&self, x: &[f64]) -> ExtendedPoint {
        let mut y = x.to_vec();
        for j in 0..self.layout.n_numeric() {
            let mut v = y[j].clamp(self.lower[j], self.upper[j]);
            if j >= self.n_r() {
                v = v.round().clamp(self.lower[j], self.upper[j]);
            }
            y[j] = v;
        }
        for b in &self.layout.blocks {
            let slots = &mut y[b.offset..b.offset + b.width()];
            if b.binary {
                slots[0] = if slots[0] >= 0.5 { 1.0 } else { 0.0 };
            } else {
                let best = argmax(slots);
                for (i, s) in slots.iter_mut().enumerate() {
                    *s = if i == best { 1.0 } else { 0.0 };
                }
            }
        }
        ExtendedPoint(y)
    }

    /// The same problem with categorical variables treated as integer
    /// indices `1..=m_h` (original-space formulation). The objective and the
    /// point layout are unchanged.
    pub fn original_space_spec(&self) -> ProblemSpec {
        let mut b = ProblemSpec::builder()
            .objective_arc(self.objective.clone())
            .thread_safe(self.thread_safe);
        for j in 0..self.layout.n_numeric() {
            b = if j < self.n_r() {
                b.continuous(self.lower[j], self.upper[j])
            } else {
                b.integer(self.lower[j], self.upper[j])
            };
        }
        for c in &self.categories {
            b = b.integer(1.0, c.len() as f64);
        }
        b.build().expect("derived from a valid spec")
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Euclidean distance between two points of the same dimension.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(sq_dist(a, b).sqrt())
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Smallest distance from `x` to any of `nodes` (`+inf` when empty).
pub fn min_distance(x: &[f64], nodes: &[Vec<f64>]) -> f64 {
    nodes
        .iter()
        .map(|n| sq_dist(x, n))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

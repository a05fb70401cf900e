//! Analytic test problems, their categorical variants and randomly
//! enlarged instances.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{Objective, OriginalPoint, ProblemSpec};

/// A benchmark problem.
#[derive(Clone, Debug)]
pub struct TestInstance {
    pub name: String,
    pub spec: ProblemSpec,
    pub known_best: Option<f64>,
    /// A point attaining `known_best`, when one is known exactly.
    pub optimum: Option<OriginalPoint>,
    pub base_name: String,
    pub multiplier: usize,
}

impl TestInstance {
    pub fn n_vars(&self) -> usize {
        self.spec.n_vars()
    }
}

pub fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

pub fn camel(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    (4.0 - 2.1 * a * a + a.powi(4) / 3.0) * a * a + a * b + (-4.0 + 4.0 * b * b) * b * b
}

pub fn goldstein_price(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let t1 = 1.0
        + (a + b + 1.0).powi(2) * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
    let t2 = 30.0
        + (2.0 * a - 3.0 * b).powi(2) * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
    t1 * t2
}

const HARTMAN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMAN3_A: [[f64; 3]; 4] = [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];
const HARTMAN3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];
const HARTMAN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMAN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartman<const N: usize>(x: &[f64], a: &[[f64; N]; 4], p: &[[f64; N]; 4]) -> f64 {
    -(0..4)
        .map(|i| {
            let s: f64 = (0..N).map(|j| a[i][j] * (x[j] - p[i][j]).powi(2)).sum();
            HARTMAN_ALPHA[i] * (-s).exp()
        })
        .sum::<f64>()
}

pub fn hartman3(x: &[f64]) -> f64 {
    hartman(x, &HARTMAN3_A, &HARTMAN3_P)
}

pub fn hartman6(x: &[f64]) -> f64 {
    hartman(x, &HARTMAN6_A, &HARTMAN6_P)
}

const SHEKEL_BETA: [f64; 10] = [1.0, 2.0, 2.0, 4.0, 4.0, 6.0, 3.0, 7.0, 5.0, 5.0];
const SHEKEL_C: [[f64; 4]; 10] = [
    [4.0, 4.0, 4.0, 4.0],
    [1.0, 1.0, 1.0, 1.0],
    [8.0, 8.0, 8.0, 8.0],
    [6.0, 6.0, 6.0, 6.0],
    [3.0, 7.0, 3.0, 7.0],
    [2.0, 9.0, 2.0, 9.0],
    [5.0, 5.0, 3.0, 3.0],
    [8.0, 1.0, 8.0, 1.0],
    [6.0, 2.0, 6.0, 2.0],
    [7.0, 3.6, 7.0, 3.6],
];

pub fn shekel(x: &[f64], m: usize) -> f64 {
    -(0..m)
        .map(|i| {
            let s: f64 = (0..4).map(|j| (x[j] - SHEKEL_C[i][j]).powi(2)).sum();
            1.0 / (s + 0.1 * SHEKEL_BETA[i])
        })
        .sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
}

/// Schaffer F7 function of `z = x - shift`.
pub fn schaffer_f7(x: &[f64], shift: &[f64]) -> f64 {
    let n = x.len();
    let z: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a - b).collect();
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let s = (z[i] * z[i] + z[i + 1] * z[i + 1]).sqrt();
        acc += s.sqrt() * ((50.0 * s.powf(0.2)).sin() + 1.0);
    }
    (acc / (n - 1) as f64).powi(2)
}

fn schaffer_shift(variant: usize) -> Vec<f64> {
    (0..12)
        .map(|i| match variant {
            1 => -30.0 + 5.0 * i as f64,
            _ => (25.0 * ((i + 1) as f64).sin()).round(),
        })
        .collect()
}

/// Literature minima of the Shekel functions (the minimizers are not known
/// in closed form).
pub const SHEKEL_MINIMA: [(usize, f64); 3] = [
    (5, -10.1531996790582),
    (7, -10.4029405668187),
    (10, -10.5364098166920),
];

const BASE_NAMES: [&str; 11] = [
    "branin",
    "camel",
    "goldsteinprice",
    "hartman3",
    "hartman6",
    "shekel5",
    "shekel7",
    "shekel10",
    "rbrock",
    "schaeffer_f7_12_1",
    "schaeffer_f7_12_2",
];

const INT_NAMES: [&str; 4] = [
    "branin_int",
    "camel_int",
    "schaeffer_f7_12_1_int",
    "schaeffer_f7_12_2_int",
];

const CAT_NAMES: [&str; 4] = ["branin_cat", "camel_cat", "goldsteinprice_cat", "hartman3_cat"];

/// Names accepted by [`builtin`] (enlarged instances are written
/// `name@s<k>`).
pub fn list_instances() -> Vec<&'static str> {
    BASE_NAMES.iter().chain(&INT_NAMES).chain(&CAT_NAMES).copied().collect()
}

fn continuous_instance(
    name: &str,
    bounds: &[(f64, f64)],
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    optimum: Option<Vec<f64>>,
    known_best: Option<f64>,
) -> TestInstance {
    let mut b = ProblemSpec::builder();
    for &(lo, hi) in bounds {
        b = b.continuous(lo, hi);
    }
    let spec = b.objective(f).thread_safe(true).build().expect("valid builtin");
    finish(name, spec, optimum, known_best)
}

fn finish(name: &str, spec: ProblemSpec, optimum: Option<Vec<f64>>, known_best: Option<f64>) -> TestInstance {
    let optimum = optimum.map(OriginalPoint);
    let known_best = known_best.or_else(|| optimum.as_ref().map(|p| spec.evaluate(p)));
    TestInstance {
        name: name.to_string(),
        spec,
        known_best,
        optimum,
        base_name: name.to_string(),
        multiplier: 1,
    }
}

fn base_instance(name: &str) -> Option<TestInstance> {
    let inst = match name {
        "branin" => continuous_instance(name, &[(-5.0, 10.0), (0.0, 15.0)], branin, Some(vec![PI, 2.275]), None),
        "camel" => continuous_instance(
            name,
            &[(-3.0, 3.0), (-2.0, 2.0)],
            camel,
            Some(vec![0.08984201368301331, -0.7126564032704135]),
            None,
        ),
        "goldsteinprice" => continuous_instance(
            name,
            &[(-2.0, 2.0), (-2.0, 2.0)],
            goldstein_price,
            Some(vec![0.0, -1.0]),
            None,
        ),
        "hartman3" => continuous_instance(
            name,
            &[(0.0, 1.0); 3],
            hartman3,
            Some(vec![0.114614, 0.555649, 0.852547]),
            None,
        ),
        "hartman6" => continuous_instance(
            name,
            &[(0.0, 1.0); 6],
            hartman6,
            Some(vec![0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]),
            None,
        ),
        "shekel5" | "shekel7" | "shekel10" => {
            let m: usize = name[6..].parse().ok()?;
            let best = SHEKEL_MINIMA.iter().find(|(k, _)| *k == m)?.1;
            continuous_instance(name, &[(0.0, 10.0); 4], move |x| shekel(x, m), None, Some(best))
        }
        "rbrock" => continuous_instance(name, &[(-10.0, 5.0), (-10.0, 10.0)], rosenbrock, Some(vec![1.0, 1.0]), None),
        "schaeffer_f7_12_1" | "schaeffer_f7_12_2" => {
            let shift = schaffer_shift(if name.ends_with('1') { 1 } else { 2 });
            let opt = shift.clone();
            continuous_instance(name, &[(-50.0, 50.0); 12], move |x| schaffer_f7(x, &shift), Some(opt), None)
        }
        _ => return None,
    };
    Some(inst)
}

/// Integer-restricted variant: the base coordinates listed in `int_coords`
/// become integer variables. Variables are stored continuous first, so
/// the objective reorders the point before calling the base function.
fn integer_variant(name: &str, base: &TestInstance, int_coords: &[usize], optimum: Vec<f64>) -> TestInstance {
    let (lo, hi) = base.spec.numeric_bounds();
    let n = lo.len();
    let cont: Vec<usize> = (0..n).filter(|j| !int_coords.contains(j)).collect();
    let order: Vec<usize> = cont.iter().chain(int_coords).copied().collect();
    let mut b = ProblemSpec::builder();
    for &j in &cont {
        b = b.continuous(lo[j], hi[j]);
    }
    for &j in int_coords {
        b = b.integer(lo[j].ceil(), hi[j].floor());
    }
    let f = base.spec.objective().clone();
    let ord = order.clone();
    let spec = b
        .objective(move |p: &[f64]| {
            let mut x = vec![0.0; ord.len()];
            for (k, &j) in ord.iter().enumerate() {
                x[j] = if k >= cont.len() { p[k].floor() } else { p[k] };
            }
            f(&x)
        })
        .thread_safe(true)
        .build()
        .expect("valid integer variant");
    let opt: Vec<f64> = order.iter().map(|&j| optimum[j]).collect();
    let mut inst = finish(name, spec, Some(opt), None);
    inst.base_name = base.name.clone();
    inst
}

fn int_instance(name: &str) -> Option<TestInstance> {
    let inst = match name {
        "branin_int" => {
            let base = base_instance("branin")?;
            // Best x2 for x1 = 3 makes the quadratic term vanish.
            let b = 5.1 / (4.0 * PI * PI);
            let x2 = b * 9.0 - 3.0 * 5.0 / PI + 6.0;
            integer_variant(name, &base, &[0], vec![3.0, x2])
        }
        "camel_int" => {
            let base = base_instance("camel")?;
            integer_variant(name, &base, &[0], vec![0.0, -std::f64::consts::FRAC_1_SQRT_2])
        }
        "schaeffer_f7_12_1_int" | "schaeffer_f7_12_2_int" => {
            let base = base_instance(&name[..name.len() - 4])?;
            let opt = base.optimum.clone()?.0;
            integer_variant(name, &base, &[0, 1, 2, 3, 4, 5], opt)
        }
        _ => return None,
    };
    Some(inst)
}

/// Effect of one categorical value on the base function.
#[derive(Clone, Debug, PartialEq)]
pub enum CatModifier {
    /// Leaves the base function unchanged.
    Reference,
    /// `y + d + c ln(1 + |y - f_ref|)` applied to the base value `y`.
    Outer { c: f64, d: f64 },
    /// Evaluates the base at `x + delta * (upper - lower)` (clamped to the
    /// box) and adds `d`.
    Shift { delta: Vec<f64>, d: f64 },
}

/// Categorical variables to add to a base instance: one modifier list per
/// variable, one modifier per value.
#[derive(Clone, Debug)]
pub struct CatVariantSpec {
    pub name: String,
    pub categories: Vec<Vec<CatModifier>>,
}

/// Adds categorical variables selecting among modified versions of the
/// base function. Choosing the reference value of every variable gives the
/// base function back; every other choice adds a positive offset, so the
/// optimum value is unchanged.
pub fn make_categorical_variant(base: &TestInstance, variant: &CatVariantSpec) -> Result<TestInstance> {
    if base.spec.n_c() > 0 || base.spec.n_d() > 0 {
        return Err(Error::InvalidProblem("categorical variants need a continuous base".into()));
    }
    let f_ref = base
        .known_best
        .ok_or_else(|| Error::InvalidProblem("base needs a known optimum".into()))?;
    let mut reference = Vec::new();
    for (h, mods) in variant.categories.iter().enumerate() {
        if mods.len() < 3 {
            return Err(Error::InvalidProblem(format!("categorical {h} needs at least three values")));
        }
        let r = mods
            .iter()
            .position(|m| *m == CatModifier::Reference)
            .ok_or_else(|| Error::InvalidProblem(format!("categorical {h} has no reference value")))?;
        for m in mods {
            let positive = match m {
                CatModifier::Reference => true,
                CatModifier::Outer { c, d } => *c >= 0.0 && *d > 0.0,
                CatModifier::Shift { d, .. } => *d > 0.0,
            };
            if !positive {
                return Err(Error::InvalidProblem("modifiers need positive offsets".into()));
            }
        }
        reference.push((r + 1) as f64);
    }
    let (lo, hi) = base.spec.numeric_bounds();
    let (lo, hi) = (lo.to_vec(), hi.to_vec());
    let n = lo.len();
    let mut b = ProblemSpec::builder();
    for j in 0..n {
        b = b.continuous(lo[j], hi[j]);
    }
    for (h, mods) in variant.categories.iter().enumerate() {
        b = b.categorical((0..mods.len()).map(|v| format!("c{h}v{}", v + 1)));
    }
    let f = base.spec.objective().clone();
    let cats = variant.categories.clone();
    let spec = b
        .objective(move |p: &[f64]| {
            let mut x = p[..n].to_vec();
            let chosen: Vec<&CatModifier> = cats
                .iter()
                .enumerate()
                .map(|(h, mods)| &mods[p[n + h] as usize - 1])
                .collect();
            let mut offset = 0.0;
            for m in &chosen {
                if let CatModifier::Shift { delta, d } = m {
                    for j in 0..n {
                        x[j] = (x[j] + delta[j] * (hi[j] - lo[j])).clamp(lo[j], hi[j]);
                    }
                    offset += d;
                }
            }
            let mut y = f(&x);
            for m in &chosen {
                if let CatModifier::Outer { c, d } = m {
                    y = y + d + c * (1.0 + (y - f_ref).abs()).ln();
                }
            }
            y + offset
        })
        .thread_safe(true)
        .build()?;
    let optimum = base.optimum.as_ref().map(|o| {
        let mut v = o.0.clone();
        v.extend(&reference);
        v
    });
    let mut inst = finish(&variant.name, spec, optimum, Some(f_ref));
    inst.base_name = base.name.clone();
    Ok(inst)
}

fn cat_spec(name: &str) -> Option<(&'static str, Vec<Vec<CatModifier>>)> {
    use CatModifier::*;
    let outer = |c: f64, d: f64| Outer { c, d };
    let shift = |delta: &[f64], d: f64| Shift {
        delta: delta.to_vec(),
        d,
    };
    Some(match name {
        "branin_cat" => (
            "branin",
            vec![vec![outer(2.0, 1.0), Reference, shift(&[0.2, -0.15], 0.3)]],
        ),
        "camel_cat" => (
            "camel",
            vec![
                vec![outer(1.5, 0.4), Reference, shift(&[-0.15, 0.1], 0.15)],
                vec![shift(&[0.1, -0.1], 0.1), Reference, outer(0.5, 0.8), outer(3.0, 0.05)],
            ],
        ),
        "goldsteinprice_cat" => (
            "goldsteinprice",
            vec![vec![shift(&[0.1, 0.1], 5.0), Reference, outer(10.0, 2.0)]],
        ),
        "hartman3_cat" => (
            "hartman3",
            vec![vec![
                outer(0.5, 0.3),
                shift(&[0.1, -0.1, 0.15], 0.2),
                Reference,
                outer(1.0, 0.1),
            ]],
        ),
        _ => return None,
    })
}

fn cat_instance(name: &str) -> Option<Result<TestInstance>> {
    let (base, categories) = cat_spec(name)?;
    let base = base_instance(base)?;
    Some(make_categorical_variant(
        &base,
        &CatVariantSpec {
            name: name.to_string(),
            categories,
        },
    ))
}

/// Looks up an instance by name. `name@s<k>` builds the `k`-fold enlarged
/// version with a fixed generator seed.
pub fn builtin(name: &str) -> Result<TestInstance> {
    if let Some((base, mult)) = name.split_once("@s") {
        let s: usize = mult
            .parse()
            .map_err(|_| Error::UnknownInstance(name.to_string()))?;
        let base = builtin(base)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
        return enlarge(&base, s, &mut rng);
    }
    if let Some(i) = base_instance(name).or_else(|| int_instance(name)) {
        return Ok(i);
    }
    match cat_instance(name) {
        Some(r) => r,
        None => Err(Error::UnknownInstance(name.to_string())),
    }
}

/// Witness evaluations must match the known optimum this closely.
pub const WITNESS_TOLERANCE: f64 = 1e-6;

/// Builds the sum of `s` weighted copies of the base function on disjoint
/// variable sets plus one more copy whose arguments are affine images of
/// random positive combinations of all variables. Variables are permuted
/// within their type group. The optimum value is preserved; a witness
/// point is constructed and checked.
pub fn enlarge<R: Rng + ?Sized>(base: &TestInstance, s: usize, rng: &mut R) -> Result<TestInstance> {
    if s < 2 {
        return Err(Error::InvalidProblem("enlargement multiplier must be at least 2".into()));
    }
    let known = base
        .known_best
        .ok_or_else(|| Error::InvalidProblem("base needs a known optimum".into()))?;
    let opt = base
        .optimum
        .clone()
        .ok_or_else(|| Error::InvalidProblem("base needs an optimum point".into()))?
        .0;
    let spec = &base.spec;
    let (blo, bhi) = spec.numeric_bounds();
    let (blo, bhi) = (blo.to_vec(), bhi.to_vec());
    let n_r = spec.n_r();
    let n_num = blo.len();
    let n = spec.n_vars();

    // Enlarged variable k stands for coordinate `coord` of copy `copy`;
    // grouped by type, shuffled within the group.
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 3];
    for copy in 0..s {
        for coord in 0..n {
            let g = if coord < n_r {
                0
            } else if coord < n_num {
                1
            } else {
                2
            };
            groups[g].push((copy, coord));
        }
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    let vars: Vec<(usize, usize)> = groups.concat();
    let n_num_big = groups[0].len() + groups[1].len();

    // Partition of the numeric variables among the numeric coordinates.
    let mut pool: Vec<usize> = (0..n_num_big).collect();
    pool.shuffle(rng);
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); n_num];
    for (i, &k) in pool.iter().enumerate() {
        let coord = if i < n_num { i } else { rng.random_range(0..n_num) };
        parts[coord].push(k);
    }
    let weights: Vec<Vec<f64>> = parts
        .iter()
        .map(|p| p.iter().map(|_| rng.random_range(0.5..=1.5)).collect())
        .collect();
    let cat_source: Vec<usize> = (n_num..n).map(|_| rng.random_range(0..s)).collect();
    let mut c: Vec<f64> = (0..=s).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = c.iter().sum();
    for v in &mut c {
        *v /= total;
    }

    let big_lo: Vec<f64> = vars.iter().map(|&(_, j)| if j < n_num { blo[j] } else { 1.0 }).collect();
    let big_hi: Vec<f64> = vars
        .iter()
        .map(|&(_, j)| if j < n_num { bhi[j] } else { spec.categories()[j - n_num].len() as f64 })
        .collect();
    let witness: Vec<f64> = vars.iter().map(|&(_, j)| opt[j]).collect();

    // Affine maps through the witness covering each coordinate's domain.
    let maps: Vec<(f64, f64)> = (0..n_num)
        .map(|i| {
            let (mut l, mut u, mut sw) = (0.0, 0.0, 0.0);
            for (&k, &a) in parts[i].iter().zip(&weights[i]) {
                l += a * big_lo[k];
                u += a * big_hi[k];
                sw += a * witness[k];
            }
            let mut slope: f64 = 0.0;
            if sw > l {
                slope = slope.max((opt[i] - blo[i]) / (sw - l));
            }
            if u > sw {
                slope = slope.max((bhi[i] - opt[i]) / (u - sw));
            }
            (sw, slope)
        })
        .collect();

    // Position of (copy, coord) in the enlarged vector.
    let mut index = vec![vec![0usize; n]; s];
    for (k, &(copy, coord)) in vars.iter().enumerate() {
        index[copy][coord] = k;
    }

    let mut b = ProblemSpec::builder();
    for &(_, j) in &vars {
        b = if j < n_r {
            b.continuous(blo[j], bhi[j])
        } else if j < n_num {
            b.integer(blo[j], bhi[j])
        } else {
            b.categorical(spec.categories()[j - n_num].clone())
        };
    }
    let f = spec.objective().clone();
    let objective: Objective = Arc::new(move |x: &[f64]| {
        let mut total = 0.0;
        let mut buf = vec![0.0; n];
        for copy in 0..s {
            for coord in 0..n {
                buf[coord] = x[index[copy][coord]];
            }
            total += c[copy] * f(&buf);
        }
        for i in 0..n_num {
            let t: f64 = parts[i].iter().zip(&weights[i]).map(|(&k, a)| a * x[k]).sum();
            let (sw, slope) = maps[i];
            let mut v = (opt[i] + slope * (t - sw)).clamp(blo[i], bhi[i]);
            if i >= n_r {
                v = v.floor();
            }
            buf[i] = v;
        }
        for (h, &copy) in cat_source.iter().enumerate() {
            buf[n_num + h] = x[index[copy][n_num + h]];
        }
        total + c[s] * f(&buf)
    });

    let big = b.objective_arc(objective).thread_safe(true).build()?;
    let at_witness = big.evaluate(&OriginalPoint(witness.clone()));
    if !((at_witness - known).abs() <= WITNESS_TOLERANCE) {
        return Err(Error::InvalidProblem(format!(
            "enlarged witness evaluates to {at_witness}, expected {known}"
        )));
    }
    Ok(TestInstance {
        name: format!("{}@s{s}", base.name),
        spec: big,
        known_best: Some(known),
        optimum: Some(OriginalPoint(witness)),
        base_name: base.name.clone(),
        multiplier: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_builds_every_instance() {
        for name in list_instances() {
            let inst = builtin(name).unwrap();
            if let (Some(o), Some(k)) = (&inst.optimum, inst.known_best) {
                inst.spec.check_original(o).unwrap();
                assert_eq!(inst.spec.evaluate(o), k, "{name}");
            }
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownInstance(_))));
    }

    #[test]
    fn dimensions() {
        assert_eq!(builtin("branin").unwrap().n_vars(), 2);
        assert_eq!(builtin("hartman3").unwrap().n_vars(), 3);
        assert_eq!(builtin("hartman6").unwrap().n_vars(), 6);
        assert_eq!(builtin("schaeffer_f7_12_1").unwrap().n_vars(), 12);
        let bc = builtin("branin_cat").unwrap();
        assert_eq!((bc.spec.n_r(), bc.spec.n_d(), bc.spec.n_c()), (2, 0, 1));
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(rosenbrock(&[1.0, 1.0]), 0.0);
        assert!((goldstein_price(&[0.0, -1.0]) - 3.0).abs() < 1e-12);
        assert!((camel(&[0.08984201368301331, -0.7126564032704135]) + 1.0316284534898774).abs() < 1e-12);
        assert!((hartman3(&[0.114614, 0.555649, 0.852547]) + 3.86278).abs() < 1e-5);
        assert!((hartman6(&[0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]) + 3.32237).abs() < 1e-5);
        for (m, best) in SHEKEL_MINIMA {
            let v = shekel(&[4.0, 4.0, 4.0, 4.0], m);
            assert!(v >= best && v - best < 1e-2, "{m}: {v}");
        }
        assert_eq!(schaffer_f7(&[1.0; 12], &[1.0; 12]), 0.0);
    }

    #[test]
    fn integer_variant_optimum() {
        let b = builtin("branin_int").unwrap();
        let expected = 10.0 + 10.0 * (1.0 - 1.0 / (8.0 * PI)) * 3f64.cos();
        assert!((b.known_best.unwrap() - expected).abs() < 1e-12);
        let c = builtin("camel_int").unwrap();
        assert!((c.known_best.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn categorical_reference_reproduces_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in CAT_NAMES {
            let inst = builtin(name).unwrap();
            let base = builtin(&inst.base_name).unwrap();
            let reference = &inst.optimum.as_ref().unwrap()[base.n_vars()..];
            for _ in 0..100 {
                let p = base.spec.sample_original(&mut rng);
                let mut q = p.0.clone();
                q.extend(reference);
                assert_eq!(inst.spec.evaluate(&OriginalPoint(q)), base.spec.evaluate(&p));
                let mut other = inst.spec.sample_original(&mut rng);
                other.0[..base.n_vars()].copy_from_slice(&p);
                assert!(inst.spec.evaluate(&other) >= base.known_best.unwrap() - 1e-9);
            }
        }
    }

    #[test]
    fn enlarged_dimensions_and_witness() {
        let base = builtin("hartman3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let big = enlarge(&base, 2, &mut rng).unwrap();
        assert_eq!(big.spec.n_r(), 6);
        let w = big.optimum.clone().unwrap();
        assert!((big.spec.evaluate(&w) - base.known_best.unwrap()).abs() <= 1e-6);
        assert!(enlarge(&base, 1, &mut rng).is_err());
    }

    #[test]
    fn enlarged_instances_by_name() {
        for name in ["branin@s2", "camel@s2", "camel_int@s3", "hartman3_cat@s2"] {
            let inst = builtin(name).unwrap();
            let w = inst.optimum.clone().unwrap();
            assert!((inst.spec.evaluate(&w) - inst.known_best.unwrap()).abs() <= 1e-6, "{name}");
        }
        assert_eq!(builtin("camel_int@s3").unwrap().spec.n_d(), 3);
        assert_eq!(builtin("hartman3_cat@s2").unwrap().spec.n_c(), 2);
    }
}

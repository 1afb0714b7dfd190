//! Nine-dimensional B-spline benchmark function with exact Fourier data.
//!
//! `f(x) = B₂(x₁)B₄(x₃)B₆(x₈) + B₂(x₂)B₄(x₅)B₆(x₆) + B₂(x₄)B₄(x₇)B₆(x₉)`, where
//! `B_j` has the Fourier coefficients `c_j sinc^j(πk/j) (−1)^k` and unit norm.
//! On `[0,1)` this is `B_j(x) = c_j · j · N_j(j x)` with the cardinal B-spline
//! `N_j` supported on `[0, j]`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Basis, Term, TermSet};
use crate::model::CoefficientOracle;
use crate::transform::NodeSet;

/// Spline orders used by the benchmark.
pub const ORDERS: [usize; 3] = [2, 4, 6];

/// Normalization `c_j` making `‖B_j‖_{L²} = 1`.
pub fn normalization(order: usize) -> f64 {
    match order {
        2 => (3.0f64 / 4.0).sqrt(),
        4 => (315.0f64 / 604.0).sqrt(),
        6 => (277200.0f64 / 655177.0).sqrt(),
        _ => panic!("spline order {order} not in {{2, 4, 6}}"),
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Fourier coefficient of `B_j` at `k`.
pub fn bspline_coefficient(order: usize, k: i64) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    normalization(order) * sinc(std::f64::consts::PI * k as f64 / order as f64).powi(order as i32) * sign
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cardinal B-spline of order `j` on `[0, j]`.
fn cardinal_bspline(order: usize, t: f64) -> f64 {
    if t <= 0.0 || t >= order as f64 {
        return 0.0;
    }
    let factorial: f64 = (1..order).map(|i| i as f64).product();
    let mut sum = 0.0;
    for i in 0..=order {
        let s = t - i as f64;
        if s <= 0.0 {
            break;
        }
        let term = binomial(order, i) * s.powi(order as i32 - 1);
        sum += if i % 2 == 0 { term } else { -term };
    }
    sum / factorial
}

/// `B_j(x)` for any real `x` (the function is 1-periodic).
pub fn bspline_value(order: usize, x: f64) -> f64 {
    let r = x - x.floor();
    let j = order as f64;
    normalization(order) * j * cardinal_bspline(order, j * r)
}

/// Symmetric partial Fourier sum of `B_j` over `|k| ≤ cutoff`.
pub fn bspline_series_value(order: usize, x: f64, cutoff: i64) -> f64 {
    let mut s = bspline_coefficient(order, 0);
    for k in 1..=cutoff {
        s += 2.0 * bspline_coefficient(order, k) * (2.0 * std::f64::consts::PI * k as f64 * x).cos();
    }
    s
}

/// The benchmark function as an exact oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    triples: [[usize; 3]; 3],
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction {
            triples: [[0, 2, 7], [1, 4, 5], [3, 6, 8]],
        }
    }
}

impl TestFunction {
    pub const DIMENSION: usize = 9;

    pub fn new() -> Self {
        Self::default()
    }

    /// Coordinate triples (0-based), each paired with the orders `(2, 4, 6)`.
    pub fn triples(&self) -> &[[usize; 3]; 3] {
        &self.triples
    }

    /// Spline order attached to a coordinate.
    pub fn order_of(&self, coord: usize) -> usize {
        for triple in &self.triples {
            if let Some(p) = triple.iter().position(|&c| c == coord) {
                return ORDERS[p];
            }
        }
        panic!("coordinate {coord} outside 0..9")
    }

    fn mean_product() -> f64 {
        ORDERS.iter().map(|&j| normalization(j)).product()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.triples
            .iter()
            .map(|t| t.iter().zip(ORDERS).map(|(&c, j)| bspline_value(j, x[c])).product::<f64>())
            .sum()
    }

    /// Exact Fourier coefficient at a 9-dimensional frequency.
    pub fn coefficient(&self, k: &[i64]) -> f64 {
        let mut total = 0.0;
        for triple in &self.triples {
            let inside = k.iter().enumerate().all(|(c, &v)| v == 0 || triple.contains(&c));
            if inside {
                total += triple
                    .iter()
                    .zip(ORDERS)
                    .map(|(&c, j)| bspline_coefficient(j, k[c]))
                    .product::<f64>();
            }
        }
        total
    }

    /// `‖f‖²`: three unit terms plus six cross products of means.
    pub fn norm_sq(&self) -> f64 {
        let m = Self::mean_product();
        3.0 + 6.0 * m * m
    }

    /// Terms with nonzero ANOVA component: the power sets of the triples.
    pub fn active_terms(&self) -> TermSet {
        let mut terms = vec![Term::empty()];
        for triple in &self.triples {
            for mask in 1u32..8 {
                let coords = (0..3).filter(|b| mask & (1 << b) != 0).map(|b| triple[b]).collect();
                terms.push(Term::new(coords).expect("distinct coordinates"));
            }
        }
        TermSet::new(Self::DIMENSION, terms).expect("valid terms")
    }

    /// ANOVA component `f_u` at the restricted point `x_u` (coordinates of `u` in ascending order).
    pub fn analytic_term(&self, term: &Term, x_u: &[f64]) -> Result<f64> {
        if x_u.len() != term.len() {
            return Err(Error::DimensionMismatch { expected: term.len(), got: x_u.len() });
        }
        if term.is_empty() {
            return Ok(3.0 * Self::mean_product());
        }
        let Some(triple) = self.triples.iter().find(|t| term.coords().iter().all(|c| t.contains(c))) else {
            return Ok(0.0);
        };
        let mut value = 1.0;
        for (&c, j) in triple.iter().zip(ORDERS) {
            match term.coords().iter().position(|&t| t == c) {
                Some(p) => value *= bspline_value(j, x_u[p]) - normalization(j),
                None => value *= normalization(j),
            }
        }
        Ok(value)
    }
}

impl CoefficientOracle for TestFunction {
    fn coefficient(&self, k: &[i64]) -> Complex64 {
        Complex64::new(TestFunction::coefficient(self, k), 0.0)
    }

    fn norm_sq(&self) -> f64 {
        TestFunction::norm_sq(self)
    }
}

/// How additive Gaussian noise is scaled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "level")]
pub enum NoiseModel {
    /// Standard deviation `level · ‖y‖₂ / √M`, so `E‖η‖² = level² ‖y‖²`.
    Relative(f64),
    /// Fixed standard deviation.
    Absolute(f64),
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::Relative(0.0)
    }
}

/// Noisy samples of the benchmark function at uniform random nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub nodes: NodeSet,
    pub values: Vec<f64>,
    pub clean: Vec<f64>,
}

impl Samples {
    pub fn complex_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// Draws `count` i.i.d. uniform nodes in `[0,1)^9` and samples `f` with noise.
pub fn sample_testfun(count: usize, noise: NoiseModel, seed: u64) -> Result<Samples> {
    if count == 0 {
        return Err(Error::EmptyNodes);
    }
    let level = match noise {
        NoiseModel::Relative(l) | NoiseModel::Absolute(l) => l,
    };
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level {level} must be nonnegative")));
    }
    let f = TestFunction::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = TestFunction::DIMENSION;
    let mut columns: Vec<Vec<f64>> = (0..d).map(|_| Vec::with_capacity(count)).collect();
    let mut clean = Vec::with_capacity(count);
    let mut point = vec![0.0; d];
    for _ in 0..count {
        for (p, col) in point.iter_mut().zip(columns.iter_mut()) {
            *p = rng.random::<f64>();
            col.push(*p);
        }
        clean.push(f.value(&point));
    }
    let sigma = match noise {
        NoiseModel::Relative(l) => l * clean.iter().map(|v| v * v).sum::<f64>().sqrt() / (count as f64).sqrt(),
        NoiseModel::Absolute(s) => s,
    };
    let values = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        clean.iter().map(|v| v + normal.sample(&mut rng)).collect()
    } else {
        clean.clone()
    };
    Ok(Samples {
        nodes: NodeSet::from_columns(columns, Basis::Exponential)?,
        values,
        clean,
    })
}

//! Regularized least-squares solvers for the coefficients of a grouped
//! transform: weighted Tikhonov via damped LSQR and group lasso via FISTA.

mod fista;
mod lsqr;
mod prox;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::GroupedIndexSet;
use crate::model::FitResult;
use crate::transform::{GroupedCoefficients, TransformPlan};

pub use fista::{fista, fista_solve, FistaConfig, FistaOutcome, FistaReport};
pub use lsqr::{lsqr, lsqr_solve, lsqr_weighted, LsqrConfig, LsqrOutcome, LsqrReport};
pub use prox::{find_xi, prox_group, prox_grouped, shrink_group_closed_form, weighted_norm};

/// Matrix-free linear map `C^cols → C^rows`.
pub trait LinearOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

impl LinearOperator for TransformPlan {
    fn rows(&self) -> usize {
        self.num_nodes()
    }

    fn cols(&self) -> usize {
        self.index_set().total_cardinality()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.forward_values(x).expect("coefficient length checked by caller")
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.adjoint_values(y).expect("sample length checked by caller")
    }
}

/// Frequency weights `ω(k) ≥ 1` of the regularizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum WeightFunction {
    /// `ω ≡ 1`.
    Constant,
    /// `Π_{j ∈ supp k} (1 + |k_j|)^s`.
    Sobolev { smoothness: f64 },
}

impl WeightFunction {
    pub fn sobolev(smoothness: f64) -> Result<Self> {
        if !(smoothness >= 0.0) || !smoothness.is_finite() {
            return Err(Error::InvalidParameter(format!("smoothness {smoothness} must be nonnegative")));
        }
        Ok(WeightFunction::Sobolev { smoothness })
    }

    pub fn weight(&self, k: &[i64]) -> f64 {
        match *self {
            WeightFunction::Constant => 1.0,
            WeightFunction::Sobolev { smoothness } => k
                .iter()
                .filter(|&&v| v != 0)
                .map(|&v| (1.0 + v.unsigned_abs() as f64).powf(smoothness))
                .product(),
        }
    }

    /// Weights of every frequency of `set` in flat order.
    pub fn flat_weights(&self, set: &GroupedIndexSet) -> Vec<f64> {
        let mut out = Vec::with_capacity(set.total_cardinality());
        for t in 0..set.num_terms() {
            for offset in 0..set.group_len(t) {
                let k = set.restricted_frequency(crate::index::FrequencyAddress { term: t, offset });
                out.push(self.weight(&k));
            }
        }
        out
    }
}

/// `½‖y − F f̂‖² + λ Σ_u ‖f̂(u)‖_{W(u)}`.
pub fn group_lasso_objective(
    plan: &TransformPlan,
    y: &[Complex64],
    coeffs: &GroupedCoefficients,
    lambda: f64,
    weight: &WeightFunction,
) -> Result<f64> {
    if y.len() != plan.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: plan.num_nodes(),
            got: y.len(),
        });
    }
    let fitted = plan.forward(coeffs)?;
    let weights = weight.flat_weights(plan.index_set());
    let data: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).norm_sqr()).sum();
    let set = plan.index_set();
    let penalty: f64 = (0..set.num_terms())
        .map(|t| {
            let r = set.group_range(t);
            weighted_norm(&coeffs.values()[r.clone()], &weights[r])
        })
        .sum();
    Ok(0.5 * data + lambda * penalty)
}

/// Solver settings for a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "solver")]
pub enum SolverConfig {
    Lsqr(LsqrConfig),
    Fista(FistaConfig),
}

/// Identifies the algorithm behind a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Lsqr,
    Fista,
}

impl SolverConfig {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverConfig::Lsqr(_) => SolverKind::Lsqr,
            SolverConfig::Fista(_) => SolverKind::Fista,
        }
    }
}

/// Convergence information of one solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// Final objective (group lasso only).
    pub objective: Option<f64>,
    /// Final step constant (group lasso only).
    pub lipschitz: Option<f64>,
}

/// Solves once for a given `λ`, optionally starting from `initial`.
pub fn solve(
    plan: &TransformPlan,
    y: &[Complex64],
    lambda: f64,
    weight: &WeightFunction,
    solver: &SolverConfig,
    initial: Option<&GroupedCoefficients>,
) -> Result<FitResult> {
    let (coeffs, diagnostics) = match solver {
        SolverConfig::Lsqr(cfg) => {
            let r = lsqr_solve(plan, y, lambda, weight, cfg, initial)?;
            (
                r.coefficients,
                Diagnostics {
                    iterations: r.iterations,
                    residual_norm: r.residual_norm,
                    converged: r.converged,
                    objective: None,
                    lipschitz: None,
                },
            )
        }
        SolverConfig::Fista(cfg) => {
            let r = fista_solve(plan, y, lambda, weight, cfg, initial)?;
            (
                r.coefficients,
                Diagnostics {
                    iterations: r.iterations,
                    residual_norm: r.residual_norm,
                    converged: r.converged,
                    objective: r.objective.last().copied(),
                    lipschitz: Some(r.lipschitz),
                },
            )
        }
    };
    FitResult::new(coeffs, lambda, solver.kind(), diagnostics)
}

/// Runs the solver for every `λ` from largest to smallest. With `warm_start`
/// each run starts at the previous minimizer.
pub fn lambda_sweep(
    plan: &TransformPlan,
    y: &[Complex64],
    solver: &SolverConfig,
    lambdas: &[f64],
    weight: &WeightFunction,
    warm_start: bool,
) -> Result<Vec<FitResult>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid lambda {bad}")));
    }
    let mut order = lambdas.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<FitResult> = Vec::with_capacity(order.len());
    for &lambda in &order {
        let initial = if warm_start { out.last().map(|f| &f.coefficients) } else { None };
        let fit = solve(plan, y, lambda, weight, solver, initial)?;
        out.push(fit);
    }
    Ok(out)
}

/// `n` logarithmically spaced values on `[lo, hi]`, descending.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi >= lo) || n == 0 {
        return Err(Error::InvalidParameter(format!("invalid grid [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![hi]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (b - (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

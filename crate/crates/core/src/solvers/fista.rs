//! FISTA with backtracking for the group lasso
//! `½‖y − F f̂‖² + λ Σ_u ‖f̂(u)‖_{W(u)}`.
//!
//! `F ĥ` is never recomputed: by linearity
//! `F ĥ^{(k+1)} = F f̂^{(k)} + β (F f̂^{(k)} − F f̂^{(k−1)})`, so an iteration costs
//! one adjoint plus one forward per step-size trial.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::prox::{prox_grouped, weighted_norm};
use super::{dot, norm, LinearOperator, WeightFunction};
use crate::error::{Error, Result};
use crate::transform::{GroupedCoefficients, TransformPlan};

const MAX_BACKTRACKS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FistaConfig {
    /// Initial step constant `L_0`.
    pub initial_lipschitz: f64,
    /// Backtracking factor `η`.
    pub backtracking: f64,
    /// Iteration limit `K`.
    pub max_iterations: usize,
    /// Relative accuracy of the prox root finder.
    pub xi_tol: f64,
    /// Stop once `‖Δf̂‖ / max(1, ‖f̂‖)` falls below this.
    pub stop_tol: f64,
    /// Keep `L = L_0` fixed and skip the line search.
    pub constant_step: bool,
    /// Leave the constant term unpenalized.
    pub exempt_mean: bool,
}

impl Default for FistaConfig {
    fn default() -> Self {
        FistaConfig {
            initial_lipschitz: 1.0,
            backtracking: 2.0,
            max_iterations: 1000,
            xi_tol: 1e-12,
            stop_tol: 1e-8,
            constant_step: false,
            exempt_mean: false,
        }
    }
}

impl FistaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_lipschitz > 0.0) || !self.initial_lipschitz.is_finite() {
            return Err(Error::InvalidParameter(format!("L0 = {} must be positive", self.initial_lipschitz)));
        }
        if !(self.backtracking > 1.0) {
            return Err(Error::InvalidParameter(format!("eta = {} must exceed 1", self.backtracking)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("K must be positive".into()));
        }
        if !(self.xi_tol > 0.0) || !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FistaOutcome {
    pub x: Vec<Complex64>,
    /// Objective at the start point followed by one value per iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub lipschitz: f64,
    pub residual_norm: f64,
    pub converged: bool,
}

fn penalty(x: &[Complex64], groups: &[Range<usize>], weights: &[f64], exempt: &[usize]) -> f64 {
    groups
        .iter()
        .enumerate()
        .filter(|(i, _)| !exempt.contains(i))
        .map(|(_, r)| weighted_norm(&x[r.clone()], &weights[r.clone()]))
        .sum()
}

fn residual_sq(y: &[Complex64], fx: &[Complex64]) -> f64 {
    y.iter().zip(fx).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// Group-lasso FISTA on a generic operator. Groups listed in `exempt` are not penalized.
#[allow(clippy::too_many_arguments)]
pub fn fista<A: LinearOperator + ?Sized>(
    op: &A,
    groups: &[Range<usize>],
    y: &[Complex64],
    lambda: f64,
    weights: &[f64],
    cfg: &FistaConfig,
    initial: Option<&[Complex64]>,
    exempt: &[usize],
) -> Result<FistaOutcome> {
    cfg.validate()?;
    if y.len() != op.rows() {
        return Err(Error::DimensionMismatch { expected: op.rows(), got: y.len() });
    }
    if weights.len() != op.cols() {
        return Err(Error::DimensionMismatch { expected: op.cols(), got: weights.len() });
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda {lambda} must be nonnegative")));
    }
    let mut f_prev = match initial {
        Some(x0) if x0.len() != op.cols() => {
            return Err(Error::DimensionMismatch { expected: op.cols(), got: x0.len() })
        }
        Some(x0) => x0.to_vec(),
        None => vec![Complex64::new(0.0, 0.0); op.cols()],
    };
    let mut ff_prev = op.apply(&f_prev);
    let mut h = f_prev.clone();
    let mut fh = ff_prev.clone();
    let mut t = 1.0f64;
    let mut lip = cfg.initial_lipschitz;
    let objective_of = |x: &[Complex64], fx: &[Complex64]| {
        0.5 * residual_sq(y, fx) + lambda * penalty(x, groups, weights, exempt)
    };
    let mut objective = vec![objective_of(&f_prev, &ff_prev)];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        iterations += 1;
        let misfit: Vec<Complex64> = fh.iter().zip(y).map(|(a, b)| a - b).collect();
        let grad = op.apply_adjoint(&misfit);
        let res_h = residual_sq(y, &fh);
        let mut backtracks = 0;
        let (f, ff) = loop {
            let z: Vec<Complex64> = h.iter().zip(&grad).map(|(a, g)| a - g / lip).collect();
            let f = prox_grouped(&z, groups, weights, lambda / lip, cfg.xi_tol, exempt)?;
            let ff = op.apply(&f);
            if cfg.constant_step {
                break (f, ff);
            }
            let diff: Vec<Complex64> = f.iter().zip(&h).map(|(a, b)| a - b).collect();
            let lhs = residual_sq(y, &ff) - res_h;
            let rhs = 2.0 * dot(&diff, &grad).re + lip * diff.iter().map(|v| v.norm_sqr()).sum::<f64>();
            if lhs <= rhs + 1e-12 * res_h.max(f64::MIN_POSITIVE) || backtracks >= MAX_BACKTRACKS {
                break (f, ff);
            }
            lip *= cfg.backtracking;
            backtracks += 1;
        };
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for i in 0..h.len() {
            h[i] = f[i] + (f[i] - f_prev[i]) * beta;
        }
        for i in 0..fh.len() {
            fh[i] = ff[i] + (ff[i] - ff_prev[i]) * beta;
        }
        objective.push(objective_of(&f, &ff));
        let change: f64 = f
            .iter()
            .zip(&f_prev)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = norm(&f).max(1.0);
        f_prev = f;
        ff_prev = ff;
        t = t_next;
        if change / scale < cfg.stop_tol {
            converged = true;
            break;
        }
    }
    Ok(FistaOutcome {
        residual_norm: residual_sq(y, &ff_prev).sqrt(),
        x: f_prev,
        objective,
        iterations,
        lipschitz: lip,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FistaReport {
    pub coefficients: GroupedCoefficients,
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub lipschitz: f64,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Group-lasso fit of grouped coefficients, groups given by the ANOVA terms.
pub fn fista_solve(
    plan: &TransformPlan,
    y: &[Complex64],
    lambda: f64,
    weight: &WeightFunction,
    cfg: &FistaConfig,
    initial: Option<&GroupedCoefficients>,
) -> Result<FistaReport> {
    let set = plan.index_set();
    if let Some(init) = initial {
        if init.index_set().as_ref() != set.as_ref() {
            return Err(Error::IndexSetMismatch);
        }
    }
    let weights = weight.flat_weights(set);
    let groups: Vec<Range<usize>> = (0..set.num_terms()).map(|t| set.group_range(t)).collect();
    let exempt: Vec<usize> = if cfg.exempt_mean {
        set.terms().iter().position(|t| t.is_empty()).into_iter().collect()
    } else {
        Vec::new()
    };
    let out = fista(plan, &groups, y, lambda, &weights, cfg, initial.map(|c| c.values()), &exempt)?;
    Ok(FistaReport {
        coefficients: GroupedCoefficients::from_values(set.clone(), out.x)?,
        objective: out.objective,
        iterations: out.iterations,
        lipschitz: out.lipschitz,
        residual_norm: out.residual_norm,
        converged: out.converged,
    })
}

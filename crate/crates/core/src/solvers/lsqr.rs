//! LSQR (Paige and Saunders) on complex vectors, and its use for the weighted
//! Tikhonov problem `½‖y − F f̂‖² + λ‖f̂‖²_W`.
//!
//! The weighted penalty is turned into plain damping by `g = W^{1/2} f̂`, which
//! gives `min ‖y − F W^{-1/2} g‖² + 2λ‖g‖²`. Damping and warm starts are both
//! handled by stacking `[A; dI]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{norm, LinearOperator, WeightFunction};
use crate::error::{Error, Result};
use crate::transform::{GroupedCoefficients, TransformPlan};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LsqrConfig {
    pub max_iterations: usize,
    pub atol: f64,
    pub btol: f64,
}

impl Default for LsqrConfig {
    fn default() -> Self {
        LsqrConfig {
            max_iterations: 1000,
            atol: 1e-10,
            btol: 1e-10,
        }
    }
}

impl LsqrConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("atol", self.atol), ("btol", self.btol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsqrOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// `‖b − A x‖` estimate at exit.
    pub residual_norm: f64,
    pub converged: bool,
}

/// Minimizes `‖b − A x‖₂` starting from zero.
pub fn lsqr<A: LinearOperator + ?Sized>(op: &A, b: &[Complex64], cfg: &LsqrConfig) -> LsqrOutcome {
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; op.cols()];
    let mut u = b.to_vec();
    let mut beta = norm(&u);
    let bnorm = beta;
    if beta == 0.0 {
        return LsqrOutcome { x, iterations: 0, residual_norm: 0.0, converged: true };
    }
    scale(&mut u, 1.0 / beta);
    let mut v = op.apply_adjoint(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        return LsqrOutcome { x, iterations: 0, residual_norm: bnorm, converged: true };
    }
    scale(&mut v, 1.0 / alpha);
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm_sq = 0.0;

    for itn in 1..=cfg.max_iterations {
        let av = op.apply(&v);
        for (ui, ai) in u.iter_mut().zip(&av) {
            *ui = ai - *ui * alpha;
        }
        beta = norm(&u);
        anorm_sq += alpha * alpha + beta * beta;
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
            let atu = op.apply_adjoint(&u);
            for (vi, ai) in v.iter_mut().zip(&atu) {
                *vi = ai - *vi * beta;
            }
            alpha = norm(&v);
            if alpha > 0.0 {
                scale(&mut v, 1.0 / alpha);
            }
        } else {
            alpha = 0.0;
        }

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        let step = phi / rho;
        let back = theta / rho;
        for ((xi, wi), vi) in x.iter_mut().zip(w.iter_mut()).zip(&v) {
            *xi += *wi * step;
            *wi = vi - *wi * back;
        }

        let rnorm = phibar;
        let arnorm = alpha * c.abs() * phibar;
        let anorm = anorm_sq.sqrt();
        let xnorm = norm(&x);
        let small_residual = rnorm <= cfg.btol * bnorm + cfg.atol * anorm * xnorm;
        let small_gradient = anorm * rnorm == 0.0 || arnorm / (anorm * rnorm) <= cfg.atol;
        if small_residual || small_gradient || alpha == 0.0 || beta == 0.0 {
            return LsqrOutcome { x, iterations: itn, residual_norm: rnorm, converged: true };
        }
        if itn == cfg.max_iterations {
            return LsqrOutcome { x, iterations: itn, residual_norm: rnorm, converged: false };
        }
    }
    unreachable!("loop returns at the last iteration")
}

fn scale(v: &mut [Complex64], f: f64) {
    for x in v {
        *x *= f;
    }
}

/// `[A D; d I]` for a diagonal column scaling `D`.
struct ScaledDamped<'a, A: ?Sized> {
    op: &'a A,
    column_scale: &'a [f64],
    damp: f64,
}

impl<A: LinearOperator + ?Sized> LinearOperator for ScaledDamped<'_, A> {
    fn rows(&self) -> usize {
        self.op.rows() + if self.damp > 0.0 { self.op.cols() } else { 0 }
    }

    fn cols(&self) -> usize {
        self.op.cols()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let scaled: Vec<Complex64> = x.iter().zip(self.column_scale).map(|(v, s)| v * s).collect();
        let mut out = self.op.apply(&scaled);
        if self.damp > 0.0 {
            out.extend(x.iter().map(|v| v * self.damp));
        }
        out
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let m = self.op.rows();
        let mut out = self.op.apply_adjoint(&y[..m]);
        for (o, s) in out.iter_mut().zip(self.column_scale) {
            *o *= s;
        }
        if self.damp > 0.0 {
            for (o, t) in out.iter_mut().zip(&y[m..]) {
                *o += t * self.damp;
            }
        }
        out
    }
}

/// Minimizes `½‖y − A f‖² + λ Σ ω_i |f_i|²` over `f`, optionally from `initial`.
pub fn lsqr_weighted<A: LinearOperator + ?Sized>(
    op: &A,
    y: &[Complex64],
    lambda: f64,
    weights: &[f64],
    cfg: &LsqrConfig,
    initial: Option<&[Complex64]>,
) -> Result<LsqrOutcome> {
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
    let inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let damped = ScaledDamped {
        op,
        column_scale: &inv_sqrt,
        damp: (2.0 * lambda).sqrt(),
    };
    let mut rhs = y.to_vec();
    let start: Option<Vec<Complex64>> = initial.map(|f0| f0.iter().zip(weights).map(|(v, w)| v * w.sqrt()).collect());
    if damped.damp > 0.0 {
        rhs.resize(damped.rows(), Complex64::new(0.0, 0.0));
    }
    if let Some(g0) = &start {
        if g0.len() != op.cols() {
            return Err(Error::DimensionMismatch { expected: op.cols(), got: g0.len() });
        }
        let a0 = damped.apply(g0);
        for (r, a) in rhs.iter_mut().zip(&a0) {
            *r -= a;
        }
    }
    let mut out = lsqr(&damped, &rhs, cfg);
    if let Some(g0) = &start {
        for (x, g) in out.x.iter_mut().zip(g0) {
            *x += g;
        }
    }
    for (x, s) in out.x.iter_mut().zip(&inv_sqrt) {
        *x *= s;
    }
    if damped.damp > 0.0 {
        let fitted = op.apply(&out.x);
        out.residual_norm = y.iter().zip(&fitted).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsqrReport {
    pub coefficients: GroupedCoefficients,
    pub iterations: usize,
    /// `‖y − F f̂‖₂` of the returned coefficients.
    pub residual_norm: f64,
    pub converged: bool,
}

/// Weighted Tikhonov fit of grouped coefficients to samples `y`.
pub fn lsqr_solve(
    plan: &TransformPlan,
    y: &[Complex64],
    lambda: f64,
    weight: &WeightFunction,
    cfg: &LsqrConfig,
    initial: Option<&GroupedCoefficients>,
) -> Result<LsqrReport> {
    let weights = weight.flat_weights(plan.index_set());
    if let Some(init) = initial {
        if init.index_set().as_ref() != plan.index_set().as_ref() {
            return Err(Error::IndexSetMismatch);
        }
    }
    let out = lsqr_weighted(plan, y, lambda, &weights, cfg, initial.map(|c| c.values()))?;
    Ok(LsqrReport {
        coefficients: GroupedCoefficients::from_values(plan.index_set().clone(), out.x)?,
        iterations: out.iterations,
        residual_norm: out.residual_norm,
        converged: out.converged,
    })
}

//! Sensitivity analysis, active-set detection, refits and error evaluation
//! for fitted grouped coefficients.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Basis, GroupedIndexSet, Term, TermSet};
use crate::solvers::{solve, Diagnostics, SolverConfig, SolverKind, WeightFunction};
use crate::transform::{FastParams, GroupedCoefficients, Method, NodeSet, TransformPlan};

/// `Σ_{k ∈ group(u)} |f̂_k|²`, and 0 for the constant term.
pub fn term_variance(coeffs: &GroupedCoefficients, term: &Term) -> Result<f64> {
    let block = coeffs.term_block(term)?;
    if term.is_empty() {
        return Ok(0.0);
    }
    Ok(block.iter().map(|v| v.norm_sqr()).sum())
}

fn variances(coeffs: &GroupedCoefficients) -> Vec<f64> {
    let set = coeffs.index_set();
    set.terms()
        .iter()
        .enumerate()
        .map(|(t, term)| {
            if term.is_empty() {
                0.0
            } else {
                coeffs.group(t).iter().map(|v| v.norm_sqr()).sum()
            }
        })
        .collect()
}

/// Variance of the partial sum: the sum of all term variances.
pub fn global_variance(coeffs: &GroupedCoefficients) -> f64 {
    variances(coeffs).iter().sum()
}

/// `term_variance(u) / Σ_{v ≠ ∅} term_variance(v)`.
pub fn global_sensitivity_index(coeffs: &GroupedCoefficients, term: &Term) -> Result<f64> {
    let total = global_variance(coeffs);
    if total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(term_variance(coeffs, term)? / total)
}

/// Fitted coefficients with their sensitivity analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub coefficients: GroupedCoefficients,
    pub lambda: f64,
    pub solver: SolverKind,
    /// Per-term variance in term order.
    pub term_variances: Vec<f64>,
    pub global_variance: f64,
    /// Per-term sensitivity index in term order; all zero when the variance vanishes.
    pub gsi: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    pub fn new(coefficients: GroupedCoefficients, lambda: f64, solver: SolverKind, diagnostics: Diagnostics) -> Result<Self> {
        let term_variances = variances(&coefficients);
        let global_variance: f64 = term_variances.iter().sum();
        let gsi = if global_variance > 0.0 {
            term_variances.iter().map(|v| v / global_variance).collect()
        } else {
            vec![0.0; term_variances.len()]
        };
        Ok(FitResult {
            coefficients,
            lambda,
            solver,
            term_variances,
            global_variance,
            gsi,
            diagnostics,
        })
    }

    pub fn terms(&self) -> &TermSet {
        self.coefficients.index_set().terms()
    }

    pub fn gsi_of(&self, term: &Term) -> Option<f64> {
        self.terms().position(term).map(|i| self.gsi[i])
    }

    /// Indices of the groups with at least one nonzero coefficient.
    pub fn nonzero_groups(&self) -> Vec<usize> {
        (0..self.terms().len())
            .filter(|&t| self.coefficients.group(t).iter().any(|v| *v != Complex64::new(0.0, 0.0)))
            .collect()
    }
}

/// Per-order thresholds `ε_1, …, ε_{d_s}` of the active-set rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveSetSpec {
    thresholds: Vec<f64>,
}

impl ActiveSetSpec {
    /// Entries must lie in `[0, 1)`.
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::InvalidParameter("empty threshold vector".into()));
        }
        if let Some(bad) = thresholds.iter().find(|e| !(**e >= 0.0 && **e < 1.0)) {
            return Err(Error::InvalidParameter(format!("threshold {bad} outside [0, 1)")));
        }
        Ok(ActiveSetSpec { thresholds })
    }

    /// The same threshold for every order up to `max_order`.
    pub fn uniform(epsilon: f64, max_order: usize) -> Result<Self> {
        ActiveSetSpec::new(vec![epsilon; max_order])
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Threshold for terms of the given order; orders beyond the vector reuse the last entry.
    pub fn threshold(&self, order: usize) -> f64 {
        self.thresholds[(order.max(1) - 1).min(self.thresholds.len() - 1)]
    }
}

/// `{∅} ∪ {u : GSI(u) > ε_{|u|}}` in canonical order.
pub fn detect_active_set(fit: &FitResult, spec: &ActiveSetSpec) -> Result<TermSet> {
    let terms = fit.terms();
    let mut keep = vec![Term::empty()];
    for (term, &g) in terms.iter().zip(&fit.gsi) {
        if !term.is_empty() && g > spec.threshold(term.len()) {
            keep.push(term.clone());
        }
    }
    TermSet::new(terms.dimension(), keep)
}

/// Known function with exact Fourier coefficients and norm.
pub trait CoefficientOracle {
    fn coefficient(&self, k: &[i64]) -> Complex64;
    fn norm_sq(&self) -> f64;
}

/// Relative `L²` error `‖f − S f‖ / ‖f‖` via Parseval.
pub fn l2_error(coeffs: &GroupedCoefficients, oracle: &dyn CoefficientOracle) -> Result<f64> {
    let set = coeffs.index_set();
    let norm_sq = oracle.norm_sq();
    let mut mismatch = 0.0;
    let mut captured = 0.0;
    for (flat, v) in coeffs.values().iter().enumerate() {
        let k = set.frequency(flat).expect("flat index within the set");
        let c = oracle.coefficient(&k);
        mismatch += (v - c).norm_sqr();
        captured += c.norm_sqr();
    }
    let radicand = norm_sq + mismatch - captured;
    if radicand < -1e-12 * norm_sq.max(1.0) {
        return Err(Error::InconsistentOracle(radicand));
    }
    Ok(radicand.max(0.0).sqrt() / norm_sq.sqrt())
}

/// Index set specification for a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexConfig {
    pub terms: TermSet,
    /// Bandwidth per term order, starting at order 1.
    pub bandwidths: Vec<usize>,
    pub basis: Basis,
}

impl IndexConfig {
    pub fn build(&self) -> Result<GroupedIndexSet> {
        GroupedIndexSet::with_order_bandwidths(self.terms.clone(), &self.bandwidths, self.basis)
    }
}

/// Active-set detection followed by a second fit on the detected terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RefitConfig {
    pub spec: ActiveSetSpec,
    /// Per-order bandwidths of the refit; `None` reuses the detection bandwidths.
    pub bandwidths: Option<Vec<usize>>,
}

/// Transform settings shared by the fits of a pipeline.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanConfig {
    pub method: Method,
    pub params: FastParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineFit {
    pub fit: FitResult,
    pub active_set: Option<TermSet>,
    pub refit: Option<FitResult>,
}

/// Fits on the full index set and, when requested, refits on the active set.
#[allow(clippy::too_many_arguments)]
pub fn fit_pipeline(
    nodes: &NodeSet,
    y: &[Complex64],
    index: &IndexConfig,
    solver: &SolverConfig,
    weight: &WeightFunction,
    lambda: f64,
    plan: &PlanConfig,
    refit: Option<&RefitConfig>,
) -> Result<PipelineFit> {
    let set = Arc::new(index.build()?);
    let full = TransformPlan::new(nodes.clone(), set, plan.method, plan.params)?;
    let fit = solve(&full, y, lambda, weight, solver, None)?;
    let Some(refit) = refit else {
        return Ok(PipelineFit { fit, active_set: None, refit: None });
    };
    let active = detect_active_set(&fit, &refit.spec)?;
    let reduced = IndexConfig {
        terms: active.clone(),
        bandwidths: refit.bandwidths.clone().unwrap_or_else(|| index.bandwidths.clone()),
        basis: index.basis,
    };
    let reduced_plan = TransformPlan::new(nodes.clone(), Arc::new(reduced.build()?), plan.method, plan.params)?;
    let second = solve(&reduced_plan, y, lambda, weight, solver, None)?;
    Ok(PipelineFit {
        fit,
        active_set: Some(active),
        refit: Some(second),
    })
}

/// DOT graph: variables feed the terms containing them, terms feed the sum.
/// Terms whose GSI is below `display_threshold` are drawn faint.
pub fn emit_anova_network(fit: &FitResult, display_threshold: f64) -> String {
    let terms = fit.terms();
    let mut out = String::from("digraph anova {\n  rankdir=LR;\n");
    for j in 0..terms.dimension() {
        let _ = writeln!(out, "  x{} [shape=circle, label=\"x{}\"];", j + 1, j + 1);
    }
    for (term, &g) in terms.iter().zip(&fit.gsi) {
        let id = term_node(term);
        let style = if term.is_empty() || g >= display_threshold {
            ""
        } else {
            ", style=dashed, color=gray, fontcolor=gray"
        };
        let label = if term.is_empty() {
            "const".to_string()
        } else {
            format!("{}\\n{:.4}", term.label(), g)
        };
        let _ = writeln!(out, "  {id} [shape=box, label=\"{label}\"{style}];");
    }
    out.push_str("  sum [shape=doublecircle, label=\"f\"];\n");
    for term in terms.iter() {
        let id = term_node(term);
        for &c in term.coords() {
            let _ = writeln!(out, "  x{} -> {id};", c + 1);
        }
    }
    for term in terms.iter() {
        let _ = writeln!(out, "  {} -> sum;", term_node(term));
    }
    out.push_str("}\n");
    out
}

fn term_node(term: &Term) -> String {
    if term.is_empty() {
        "t_const".into()
    } else {
        format!("t_{}", term.label().replace('-', "_"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_term_superset;

    fn fit_with(values: Vec<Complex64>, set: GroupedIndexSet) -> FitResult {
        let coeffs = GroupedCoefficients::from_values(Arc::new(set), values).unwrap();
        FitResult::new(coeffs, 1.0, SolverKind::Lsqr, Diagnostics::default()).unwrap()
    }

    fn small_set() -> GroupedIndexSet {
        GroupedIndexSet::with_order_bandwidths(build_term_superset(2, 1).unwrap(), &[4], Basis::Exponential).unwrap()
    }

    #[test]
    fn variance_examples() {
        let set = small_set();
        let mut v = vec![Complex64::new(0.0, 0.0); 7];
        let fit = fit_with(v.clone(), set.clone());
        assert_eq!(fit.global_variance, 0.0);
        let t1 = Term::new(vec![0]).unwrap();
        assert!(global_sensitivity_index(&fit.coefficients, &t1).is_err());
        v[0] = Complex64::new(9.0, 0.0);
        v[2] = Complex64::new(0.0, 2.0);
        let fit = fit_with(v.clone(), set.clone());
        assert_eq!(term_variance(&fit.coefficients, &t1).unwrap(), 4.0);
        assert_eq!(term_variance(&fit.coefficients, &Term::empty()).unwrap(), 0.0);
        assert_eq!(fit.gsi_of(&t1), Some(1.0));
        v[5] = Complex64::new(2.0, 0.0);
        let fit = fit_with(v, set);
        assert_eq!(fit.gsi_of(&t1), Some(0.5));
        assert_eq!(fit.gsi_of(&Term::new(vec![1]).unwrap()), Some(0.5));
    }

    #[test]
    fn active_set_rule() {
        let mut v = vec![Complex64::new(0.0, 0.0); 7];
        v[1] = Complex64::new(3.0, 0.0);
        v[4] = Complex64::new(1.0, 0.0);
        let fit = fit_with(v, small_set());
        let all = detect_active_set(&fit, &ActiveSetSpec::new(vec![0.95]).unwrap()).unwrap();
        assert_eq!(all.len(), 1);
        let some = detect_active_set(&fit, &ActiveSetSpec::new(vec![0.5]).unwrap()).unwrap();
        assert_eq!(some.len(), 2);
        assert!(ActiveSetSpec::new(vec![1.0]).is_err());
    }

    #[test]
    fn network_structure() {
        let fit = fit_with(vec![Complex64::new(1.0, 0.0); 7], small_set());
        let dot = emit_anova_network(&fit, 0.01);
        assert_eq!(dot.matches("shape=circle").count(), 2);
        assert_eq!(dot.matches("shape=box").count(), 3);
        assert_eq!(dot.matches("shape=doublecircle").count(), 1);
        assert_eq!(dot.matches("-> t_").count(), 2);
        assert_eq!(dot.matches("-> sum").count(), 3);
    }
}

use std::sync::Arc;

use anyhow::{bail, Result};
use grouped_anova::index::{build_term_superset, Basis, GroupedIndexSet, TermSet};
use grouped_anova::model::{detect_active_set, l2_error, FitResult};
use grouped_anova::solvers::{lambda_sweep, solve, SolverKind};
use grouped_anova::test_functions::{sample_testfun, NoiseModel, TestFunction};
use grouped_anova::transform::{GroupedCoefficients, TransformPlan};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::table::{ResultTable, TableRow};

/// Outcome of one `λ` in one repetition.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaPoint {
    pub lambda: f64,
    /// Relative `L²` error: of the active-set refit for LSQR, of the full fit for FISTA.
    pub error: f64,
    /// Sensitivity indices of the full fit in term order.
    pub gsi: Vec<f64>,
    pub active_set: TermSet,
    pub nonzero: TermSet,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Repetition {
    pub seed: u64,
    /// Descending in `λ`.
    pub points: Vec<LambdaPoint>,
    /// Full fit at this repetition's error minimizer.
    pub best_fit: FitResult,
}

impl Repetition {
    pub fn best_index(&self) -> usize {
        argmin(self.points.iter().map(|p| p.error))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticReport {
    pub solver: SolverKind,
    /// Descending.
    pub lambdas: Vec<f64>,
    /// Terms of the full index set, constant first.
    pub terms: TermSet,
    pub repetitions: Vec<Repetition>,
}

impl SyntheticReport {
    pub fn mean_errors(&self) -> Vec<f64> {
        let n = self.repetitions.len() as f64;
        (0..self.lambdas.len())
            .map(|i| self.repetitions.iter().map(|r| r.points[i].error).sum::<f64>() / n)
            .collect()
    }

    /// Averaged sensitivity indices per `λ` in term order.
    pub fn mean_gsi(&self) -> Vec<Vec<f64>> {
        let n = self.repetitions.len() as f64;
        (0..self.lambdas.len())
            .map(|i| {
                (0..self.terms.len())
                    .map(|t| self.repetitions.iter().map(|r| r.points[i].gsi[t]).sum::<f64>() / n)
                    .collect()
            })
            .collect()
    }

    /// Index of the smallest averaged error.
    pub fn best_index(&self) -> usize {
        argmin(self.mean_errors().into_iter())
    }

    pub fn min_error(&self) -> f64 {
        self.mean_errors()[self.best_index()]
    }

    /// Averaged results, ascending in `λ`, without the constant term.
    pub fn table(&self) -> ResultTable {
        let errors = self.mean_errors();
        let gsi = self.mean_gsi();
        let keep: Vec<usize> = (0..self.terms.len()).filter(|&t| !self.terms.terms()[t].is_empty()).collect();
        let rows = (0..self.lambdas.len())
            .rev()
            .map(|i| TableRow {
                lambda: self.lambdas[i],
                metric: errors[i],
                gsi: keep.iter().map(|&t| gsi[i][t]).collect(),
            })
            .collect();
        ResultTable {
            metric: "L2error".into(),
            term_labels: keep.iter().map(|&t| self.terms.terms()[t].label()).collect(),
            rows,
        }
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(0, |(i, _)| i)
}

/// Seed of repetition `r`.
pub fn repetition_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64)
}

/// Samples the benchmark function, sweeps `λ` and evaluates every fit against the exact coefficients.
pub fn run_synthetic(cfg: &ExperimentConfig) -> Result<SyntheticReport> {
    cfg.validate()?;
    let bandwidths = cfg.preset.bandwidths();
    if bandwidths.len() > TestFunction::DIMENSION {
        bail!("superposition threshold {} exceeds the dimension", bandwidths.len());
    }
    let terms = build_term_superset(TestFunction::DIMENSION, bandwidths.len())?;
    let set = Arc::new(GroupedIndexSet::with_order_bandwidths(terms.clone(), &bandwidths, Basis::Exponential)?);
    let lambdas = cfg.lambdas()?;
    let repetitions = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(cfg, &set, &lambdas, repetition_seed(cfg.seed, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticReport {
        solver: cfg.solver()?.kind(),
        lambdas: {
            let mut l = lambdas;
            l.sort_by(|a, b| b.total_cmp(a));
            l
        },
        terms,
        repetitions,
    })
}

fn run_repetition(cfg: &ExperimentConfig, set: &Arc<GroupedIndexSet>, lambdas: &[f64], seed: u64) -> Result<Repetition> {
    let samples = sample_testfun(cfg.samples, NoiseModel::Relative(cfg.noise), seed)?;
    let y = samples.complex_values();
    let solver = cfg.solver()?;
    let weight = cfg.weight()?;
    let spec = cfg.active_set_spec()?;
    let oracle = TestFunction::new();
    let plan = TransformPlan::new(samples.nodes.clone(), set.clone(), cfg.method, cfg.fast)?;
    let fits = lambda_sweep(&plan, &y, &solver, lambdas, &weight, cfg.warm_start)?;
    let refit_bandwidths = cfg.refit_bandwidths();
    let mut refit_plan: Option<(TermSet, TransformPlan)> = None;
    let mut previous_refit: Option<GroupedCoefficients> = None;
    let mut points = Vec::with_capacity(fits.len());
    for fit in &fits {
        let active_set = detect_active_set(fit, &spec)?;
        let nonzero = TermSet::new(
            set.dimension(),
            fit.nonzero_groups().into_iter().map(|t| set.terms().terms()[t].clone()).collect(),
        )?;
        let error = match solver.kind() {
            SolverKind::Fista => l2_error(&fit.coefficients, &oracle)?,
            SolverKind::Lsqr => {
                if refit_plan.as_ref().is_none_or(|(t, _)| *t != active_set) {
                    let reduced = Arc::new(GroupedIndexSet::with_order_bandwidths(
                        active_set.clone(),
                        &refit_bandwidths,
                        Basis::Exponential,
                    )?);
                    refit_plan = Some((
                        active_set.clone(),
                        TransformPlan::new(samples.nodes.clone(), reduced, cfg.method, cfg.fast)?,
                    ));
                    previous_refit = None;
                }
                let (_, rplan) = refit_plan.as_ref().expect("refit plan built above");
                let initial = if cfg.warm_start { previous_refit.as_ref() } else { None };
                let refit = solve(rplan, &y, fit.lambda, &weight, &solver, initial)?;
                let e = l2_error(&refit.coefficients, &oracle)?;
                previous_refit = Some(refit.coefficients);
                e
            }
        };
        points.push(LambdaPoint {
            lambda: fit.lambda,
            error,
            gsi: fit.gsi.clone(),
            active_set,
            nonzero,
            iterations: fit.diagnostics.iterations,
        });
    }
    let best = argmin(points.iter().map(|p| p.error));
    Ok(Repetition {
        seed,
        points,
        best_fit: fits.into_iter().nth(best).expect("nonempty sweep"),
    })
}

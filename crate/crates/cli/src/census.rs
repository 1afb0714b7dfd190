use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use grouped_anova::dataset::{
    kfold, labels_as_samples, load_path, prepare_split, score_predictions, split, Fold, Recipe, TabularDataset,
};
use grouped_anova::index::{build_term_superset, Basis, GroupedIndexSet, TermSet};
use grouped_anova::model::detect_active_set;
use grouped_anova::solvers::{lambda_sweep, solve, SolverConfig};
use grouped_anova::transform::{GroupedCoefficients, TransformPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::table::{ResultTable, TableRow};

/// Fold-averaged accuracies and sensitivity indices per `λ` (descending).
#[derive(Clone, Debug, PartialEq)]
pub struct CensusReport {
    pub rows: usize,
    pub index_size: usize,
    pub lambdas: Vec<f64>,
    pub terms: TermSet,
    pub lsqr_accuracy: Vec<f64>,
    pub refit_accuracy: Vec<f64>,
    pub fista_accuracy: Vec<f64>,
    /// Mean number of terms kept by the active-set rule, constant included.
    pub refit_terms: Vec<f64>,
    pub lsqr_gsi: Vec<Vec<f64>>,
    pub fista_gsi: Vec<Vec<f64>>,
}

impl CensusReport {
    fn table(&self, accuracy: &[f64], gsi: &[Vec<f64>]) -> ResultTable {
        let keep: Vec<usize> = (0..self.terms.len()).filter(|&t| !self.terms.terms()[t].is_empty()).collect();
        ResultTable {
            metric: "accuracy".into(),
            term_labels: keep.iter().map(|&t| self.terms.terms()[t].label()).collect(),
            rows: (0..self.lambdas.len())
                .rev()
                .map(|i| TableRow {
                    lambda: self.lambdas[i],
                    metric: accuracy[i],
                    gsi: keep.iter().map(|&t| gsi[i][t]).collect(),
                })
                .collect(),
        }
    }

    pub fn lsqr_table(&self) -> ResultTable {
        self.table(&self.lsqr_accuracy, &self.lsqr_gsi)
    }

    /// Refit accuracies next to the sensitivity indices that selected the terms.
    pub fn refit_table(&self) -> ResultTable {
        self.table(&self.refit_accuracy, &self.lsqr_gsi)
    }

    pub fn fista_table(&self) -> ResultTable {
        self.table(&self.fista_accuracy, &self.fista_gsi)
    }

    pub fn best(values: &[f64]) -> f64 {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows: {}", self.rows);
        let _ = writeln!(s, "frequencies: {}", self.index_size);
        let _ = writeln!(s, "best l2 accuracy: {:.2}", Self::best(&self.lsqr_accuracy));
        let _ = writeln!(s, "best l2 refit accuracy: {:.2}", Self::best(&self.refit_accuracy));
        let _ = writeln!(s, "best group lasso accuracy: {:.2}", Self::best(&self.fista_accuracy));
        s
    }
}

/// Loads the census file with the standard recipe and runs the pipeline.
pub fn run_census(cfg: &ExperimentConfig, path: &Path) -> Result<CensusReport> {
    let data = load_path(path, &Recipe::census()).with_context(|| format!("loading {}", path.display()))?;
    run_census_on(cfg, &data)
}

/// Cross-validated classification with `ℓ₂`, `ℓ₂` plus active-set refit, and group lasso.
pub fn run_census_on(cfg: &ExperimentConfig, data: &TabularDataset) -> Result<CensusReport> {
    cfg.validate()?;
    let bandwidths = cfg.preset.bandwidths();
    let d = data.num_features();
    if bandwidths.len() > d {
        bail!("superposition threshold {} exceeds the {d} features", bandwidths.len());
    }
    let terms = build_term_superset(d, bandwidths.len())?;
    let set = Arc::new(GroupedIndexSet::with_order_bandwidths(terms.clone(), &bandwidths, Basis::Cosine)?);
    let lambdas = cfg.lambdas()?;
    let folds: Vec<Fold> = if cfg.folds == 1 {
        let (train, test) = split(data.len(), 0.8, cfg.seed)?;
        vec![Fold { train, test }]
    } else {
        kfold(data.len(), cfg.folds, cfg.seed)?
    };
    let n = lambdas.len();
    let mut report = CensusReport {
        rows: data.len(),
        index_size: set.total_cardinality(),
        lambdas: {
            let mut l = lambdas.clone();
            l.sort_by(|a, b| b.total_cmp(a));
            l
        },
        terms: terms.clone(),
        lsqr_accuracy: vec![0.0; n],
        refit_accuracy: vec![0.0; n],
        fista_accuracy: vec![0.0; n],
        refit_terms: vec![0.0; n],
        lsqr_gsi: vec![vec![0.0; terms.len()]; n],
        fista_gsi: vec![vec![0.0; terms.len()]; n],
    };
    let weight = cfg.weight()?;
    let spec = cfg.active_set_spec()?;
    let refit_bandwidths = cfg.refit_bandwidths();
    let scale = 1.0 / folds.len() as f64;
    for fold in &folds {
        let prepared = prepare_split(data, &fold.train, &fold.test)?;
        let y = labels_as_samples(&prepared.train_labels);
        let train_plan = TransformPlan::new(prepared.train_nodes.clone(), set.clone(), cfg.method, cfg.fast)?;
        let test_plan = TransformPlan::new(prepared.test_nodes.clone(), set.clone(), cfg.method, cfg.fast)?;
        let score = |plan: &TransformPlan, c: &GroupedCoefficients| -> Result<f64> {
            Ok(score_predictions(&plan.forward(c)?, &prepared.test_labels)?.accuracy)
        };

        let lsqr_solver = SolverConfig::Lsqr(cfg.lsqr.clone());
        let fits = lambda_sweep(&train_plan, &y, &lsqr_solver, &lambdas, &weight, cfg.warm_start)?;
        let mut cached: Option<(TermSet, TransformPlan, TransformPlan)> = None;
        let mut previous: Option<GroupedCoefficients> = None;
        for (i, fit) in fits.iter().enumerate() {
            report.lsqr_accuracy[i] += scale * score(&test_plan, &fit.coefficients)?;
            for (g, v) in report.lsqr_gsi[i].iter_mut().zip(&fit.gsi) {
                *g += scale * v;
            }
            let active = detect_active_set(fit, &spec)?;
            report.refit_terms[i] += scale * active.len() as f64;
            if cached.as_ref().is_none_or(|(t, _, _)| *t != active) {
                let reduced =
                    Arc::new(GroupedIndexSet::with_order_bandwidths(active.clone(), &refit_bandwidths, Basis::Cosine)?);
                cached = Some((
                    active.clone(),
                    TransformPlan::new(prepared.train_nodes.clone(), reduced.clone(), cfg.method, cfg.fast)?,
                    TransformPlan::new(prepared.test_nodes.clone(), reduced, cfg.method, cfg.fast)?,
                ));
                previous = None;
            }
            let (_, rtrain, rtest) = cached.as_ref().expect("refit plans built above");
            let initial = if cfg.warm_start { previous.as_ref() } else { None };
            let refit = solve(rtrain, &y, fit.lambda, &weight, &lsqr_solver, initial)?;
            report.refit_accuracy[i] += scale * score(rtest, &refit.coefficients)?;
            previous = Some(refit.coefficients);
        }

        let fista_solver = SolverConfig::Fista(cfg.fista.clone());
        let fits = lambda_sweep(&train_plan, &y, &fista_solver, &lambdas, &weight, cfg.warm_start)?;
        for (i, fit) in fits.iter().enumerate() {
            report.fista_accuracy[i] += scale * score(&test_plan, &fit.coefficients)?;
            for (g, v) in report.fista_gsi[i].iter_mut().zip(&fit.gsi) {
                *g += scale * v;
            }
        }
    }
    Ok(report)
}

const WORKCLASS: [&str; 4] = ["Private", "Self-emp", "Federal-gov", "Local-gov"];
const EDUCATION: [&str; 4] = ["HS-grad", "Some-college", "Bachelors", "Masters"];
const MARITAL: [&str; 3] = ["Never-married", "Married-civ-spouse", "Divorced"];
const OCCUPATION: [&str; 4] = ["Sales", "Exec-managerial", "Craft-repair", "Tech-support"];
const RELATIONSHIP: [&str; 3] = ["Husband", "Not-in-family", "Own-child"];
const RACE: [&str; 2] = ["White", "Black"];
const SEX: [&str; 2] = ["Male", "Female"];
const COUNTRY: [&str; 3] = ["United-States", "Mexico", "Germany"];

/// Deterministic table in the census file layout with a learnable income label.
/// Every tenth row has a missing workclass.
pub fn synthetic_census_csv(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..rows {
        let age: u32 = rng.random_range(17..80);
        let edu_num: u32 = rng.random_range(1..17);
        let hours: u32 = rng.random_range(10..70);
        let gain: u32 = if rng.random::<f64>() < 0.1 { rng.random_range(1000..20000) } else { 0 };
        let loss: u32 = if rng.random::<f64>() < 0.05 { rng.random_range(100..2500) } else { 0 };
        let marital = rng.random_range(0..MARITAL.len());
        let score = 0.04 * f64::from(age) + 0.3 * f64::from(edu_num) + 0.03 * f64::from(hours)
            + if marital == 1 { 1.5 } else { 0.0 }
            + if gain > 0 { 2.0 } else { 0.0 }
            + rng.random::<f64>() * 1.5;
        let label = if score > 8.0 { ">50K" } else { "<=50K" };
        let workclass = if i % 10 == 9 { "?" } else { WORKCLASS[rng.random_range(0..WORKCLASS.len())] };
        let _ = writeln!(
            out,
            "{age}, {workclass}, {}, {}, {edu_num}, {}, {}, {}, {}, {}, {gain}, {loss}, {hours}, {}, {label}",
            rng.random_range(10_000..500_000u32),
            EDUCATION[rng.random_range(0..EDUCATION.len())],
            MARITAL[marital],
            OCCUPATION[rng.random_range(0..OCCUPATION.len())],
            RELATIONSHIP[rng.random_range(0..RELATIONSHIP.len())],
            RACE[rng.random_range(0..RACE.len())],
            SEX[rng.random_range(0..SEX.len())],
            COUNTRY[rng.random_range(0..COUNTRY.len())],
        );
    }
    out
}

//! Acceptance suite: one line per criterion.
//!
//! Criteria 5–7 run only with `ANOVA_SLOW=1`. Criterion 8 uses the census file
//! named by `ANOVA_CENSUS_DATA` and otherwise a pinned synthetic table.
//! `ANOVA_CRITERIA=5,7` restricts the run to the listed criteria.

mod support;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anova_cli::{run_census, run_census_on, run_synthetic, synthetic_census_csv, ExperimentConfig, ExperimentKind, Preset};
use grouped_anova::dataset::{load_and_preprocess, Recipe};
use grouped_anova::index::{build_term_superset, Basis, GroupedIndexSet, Term, TermSet};
use grouped_anova::model::{detect_active_set, emit_anova_network, ActiveSetSpec, FitResult};
use grouped_anova::solvers::{
    fista_solve, lsqr_solve, prox_grouped, Diagnostics, FistaConfig, LsqrConfig, SolverKind, WeightFunction,
};
use grouped_anova::test_functions::{bspline_value, TestFunction};
use grouped_anova::transform::{FastParams, GroupedCoefficients, Method, NodeSet, TransformPlan};
use num_complex::Complex64;
use rand::Rng;
use support::*;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    fn skip(detail: &str) -> Self {
        Outcome {
            status: Status::Skip,
            detail: detail.into(),
        }
    }
}

fn transform_correctness() -> Outcome {
    let mut worst = [0.0f64; 2];
    let mut worst_adjointness = [0.0f64; 2];
    let mut instances = 0;
    let mut failures = 0;
    for seed in 0..120u64 {
        let basis = if seed % 2 == 0 { Basis::Exponential } else { Basis::Cosine };
        let mut r = rng(seed);
        let d = r.random_range(1..=6usize);
        let ds = r.random_range(1..=d.min(3));
        let bandwidths: Vec<usize> = (0..ds)
            .map(|_| match basis {
                Basis::Exponential => 2 * r.random_range(1..=8usize),
                Basis::Cosine => r.random_range(2..=16usize),
            })
            .collect();
        let m = r.random_range(1..=200usize);
        let set = Arc::new(
            GroupedIndexSet::with_order_bandwidths(build_term_superset(d, ds).unwrap(), &bandwidths, basis).unwrap(),
        );
        let nodes = NodeSet::from_points(&random_points(&mut r, m, d), basis).unwrap();
        let dense = dense_matrix(&set, &nodes);
        let coeffs = random_complex(&mut r, set.total_cardinality());
        let y = random_complex(&mut r, m);
        let expect_fwd = (&dense * to_vector(&coeffs)).as_slice().to_vec();
        let expect_adj = (dense.adjoint() * to_vector(&y)).as_slice().to_vec();
        for (slot, (method, tol)) in [(Method::Direct, 1e-10), (Method::Fast, 1e-7)].into_iter().enumerate() {
            let plan = TransformPlan::new(nodes.clone(), set.clone(), method, FastParams::default()).unwrap();
            let fwd = plan.forward_values(&coeffs).unwrap();
            let adj = plan.adjoint_values(&y).unwrap();
            let e = rel_max_err(&fwd, &expect_fwd).max(rel_max_err(&adj, &expect_adj));
            let lhs = inner(&fwd, &y);
            let a = (lhs - inner(&coeffs, &adj)).norm() / lhs.norm().max(1.0);
            worst[slot] = worst[slot].max(e);
            worst_adjointness[slot] = worst_adjointness[slot].max(a);
            if e > tol || a > tol {
                failures += 1;
            }
        }
        instances += 1;
    }
    Outcome::check(
        failures == 0,
        format!(
            "{instances} instances; direct err {:.1e} adj {:.1e} (tol 1e-10); fast err {:.1e} adj {:.1e} (tol 1e-7)",
            worst[0], worst_adjointness[0], worst[1], worst_adjointness[1]
        ),
    )
}

fn prox_exactness() -> Outcome {
    let mut r = rng(2);
    let mut worst_stationarity: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let mut zero_violations = 0;
    let mut cases = 0;
    let mut zero_cases = 0;
    for case in 0..1200 {
        let len = r.random_range(1..=30usize);
        let y = random_complex(&mut r, len);
        let sobolev = case % 2 == 0;
        let weights: Vec<f64> = if sobolev {
            let s = r.random_range(0.5..3.0);
            let w = WeightFunction::sobolev(s).unwrap();
            (0..len).map(|_| w.weight(&[r.random_range(-20..=20i64), r.random_range(-5..=5i64)])).collect()
        } else {
            vec![1.0; len]
        };
        let limit: f64 = y.iter().zip(&weights).map(|(v, w)| v.norm_sqr() / w).sum::<f64>().sqrt();
        let threshold = limit * r.random_range(0.01..1.5);
        let x = prox_grouped(&y, std::slice::from_ref(&(0..len)), &weights, threshold, 1e-12, &[]).unwrap();
        cases += 1;
        let x_norm: f64 = x.iter().zip(&weights).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt();
        if x_norm == 0.0 {
            zero_cases += 1;
            if threshold < limit {
                zero_violations += 1;
            }
            continue;
        }
        if threshold >= limit {
            zero_violations += 1;
        }
        let residual: f64 = x
            .iter()
            .zip(&y)
            .zip(&weights)
            .map(|((xi, yi), w)| (xi - yi + xi * (threshold * w / x_norm)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst_stationarity = worst_stationarity.max(residual);
        if !sobolev {
            let y_norm: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let expect: Vec<Complex64> = y.iter().map(|v| v * (1.0 - threshold / y_norm)).collect();
            let diff: f64 = x.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst_closed = worst_closed.max(diff);
        }
    }
    Outcome::check(
        worst_stationarity <= 1e-8 && worst_closed <= 1e-12 && zero_violations == 0,
        format!(
            "{cases} cases ({zero_cases} zero); stationarity {worst_stationarity:.1e} (tol 1e-8); \
             unit-weight closed form {worst_closed:.1e} (tol 1e-12); zero-rule violations {zero_violations}"
        ),
    )
}

fn solver_oracles() -> Outcome {
    let cfg = LsqrConfig {
        max_iterations: 2000,
        atol: 1e-14,
        btol: 1e-14,
    };
    // Tensor grid: the columns are orthogonal with squared norm M.
    let n = 8usize;
    let grid: Vec<Vec<f64>> =
        (0..n * n).map(|i| vec![(i % n) as f64 / n as f64, (i / n) as f64 / n as f64]).collect();
    let nodes = NodeSet::from_points(&grid, Basis::Exponential).unwrap();
    let set = Arc::new(
        GroupedIndexSet::with_order_bandwidths(build_term_superset(2, 2).unwrap(), &[6, 6], Basis::Exponential).unwrap(),
    );
    let fh = dense_matrix(&set, &nodes).adjoint();
    let plan = TransformPlan::new(nodes, set.clone(), Method::Direct, FastParams::default()).unwrap();
    let mut r = rng(3);
    let y = random_complex(&mut r, n * n);
    let fh_y = (&fh * to_vector(&y)).as_slice().to_vec();
    let mut worst_grid: f64 = 0.0;
    for (s, lambda) in [(0.0, 0.5), (1.0, 3.0), (2.0, 0.01)] {
        let weight = if s == 0.0 { WeightFunction::Constant } else { WeightFunction::sobolev(s).unwrap() };
        let w = weight.flat_weights(&set);
        let expect: Vec<Complex64> =
            fh_y.iter().zip(&w).map(|(v, w)| v / ((n * n) as f64 + 2.0 * lambda * w)).collect();
        let got = lsqr_solve(&plan, &y, lambda, &weight, &cfg, None).unwrap();
        worst_grid = worst_grid.max(rel_max_err(got.coefficients.values(), &expect));
    }

    let mut worst_dense: f64 = 0.0;
    for seed in 0..10u64 {
        let mut r = rng(100 + seed);
        let d = r.random_range(2..=4usize);
        let basis = if seed % 2 == 0 { Basis::Exponential } else { Basis::Cosine };
        let bw = match basis {
            Basis::Exponential => vec![6, 4],
            Basis::Cosine => vec![5, 3],
        };
        let set = Arc::new(GroupedIndexSet::with_order_bandwidths(build_term_superset(d, 2).unwrap(), &bw, basis).unwrap());
        let m = 3 * set.total_cardinality();
        let nodes = NodeSet::from_points(&random_points(&mut r, m, d), basis).unwrap();
        let dense = dense_matrix(&set, &nodes);
        let plan = TransformPlan::new(nodes, set.clone(), Method::Auto, FastParams::default()).unwrap();
        let y = random_complex(&mut r, m);
        let lambda = [0.0, 0.3, 5.0][seed as usize % 3];
        let weight = WeightFunction::sobolev(1.0).unwrap();
        let w = weight.flat_weights(&set);
        let expect = normal_equations(&dense, &y, lambda, &w);
        let got = lsqr_solve(&plan, &y, lambda, &weight, &cfg, None).unwrap();
        worst_dense = worst_dense.max(rel_max_err(got.coefficients.values(), &expect));
    }

    let mut worst_objective: f64 = 0.0;
    for seed in 0..4u64 {
        let mut r = rng(200 + seed);
        let set = Arc::new(
            GroupedIndexSet::with_order_bandwidths(build_term_superset(2, 1).unwrap(), &[4], Basis::Exponential)
                .unwrap(),
        );
        let nodes = NodeSet::from_points(&random_points(&mut r, 30, 2), Basis::Exponential).unwrap();
        let dense = dense_matrix(&set, &nodes);
        let plan = TransformPlan::new(nodes, set.clone(), Method::Direct, FastParams::default()).unwrap();
        let y = random_complex(&mut r, 30);
        let lambda = [0.5, 2.0, 6.0, 0.05][seed as usize];
        let weight = if seed % 2 == 0 { WeightFunction::Constant } else { WeightFunction::sobolev(1.0).unwrap() };
        let w = weight.flat_weights(&set);
        let groups: Vec<std::ops::Range<usize>> = (0..set.num_terms()).map(|t| set.group_range(t)).collect();
        let objective = |x: &[Complex64]| {
            let fx = (&dense * to_vector(x)).as_slice().to_vec();
            let data: f64 = y.iter().zip(&fx).map(|(a, b)| (a - b).norm_sqr()).sum();
            let pen: f64 = groups
                .iter()
                .map(|g| x[g.clone()].iter().zip(&w[g.clone()]).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt())
                .sum();
            0.5 * data + lambda * pen
        };
        // Fixed-step proximal gradient with step 1/‖A‖².
        let gram = dense.adjoint() * &dense;
        let lip = gram.symmetric_eigenvalues().iter().fold(0.0f64, |a, &b| a.max(b));
        let mut x = vec![Complex64::new(0.0, 0.0); set.total_cardinality()];
        for _ in 0..40_000 {
            let fx = (&dense * to_vector(&x)).as_slice().to_vec();
            let misfit: Vec<Complex64> = fx.iter().zip(&y).map(|(a, b)| a - b).collect();
            let grad = (dense.adjoint() * to_vector(&misfit)).as_slice().to_vec();
            let z: Vec<Complex64> = x.iter().zip(&grad).map(|(a, g)| a - g / lip).collect();
            for g in &groups {
                let p = prox_by_bisection(&z[g.clone()], &w[g.clone()], lambda / lip);
                x[g.clone()].copy_from_slice(&p);
            }
        }
        let oracle = objective(&x);
        let cfg = FistaConfig {
            max_iterations: 20_000,
            stop_tol: 1e-13,
            ..FistaConfig::default()
        };
        let got = fista_solve(&plan, &y, lambda, &weight, &cfg, None).unwrap();
        let value = objective(got.coefficients.values());
        worst_objective = worst_objective.max((value - oracle).abs() / oracle.abs().max(1.0));
    }
    Outcome::check(
        worst_grid <= 1e-8 && worst_dense <= 1e-6 && worst_objective <= 1e-6,
        format!(
            "equispaced closed form {worst_grid:.1e} (tol 1e-8); dense normal equations {worst_dense:.1e} \
             (tol 1e-6); group lasso objective gap {worst_objective:.1e} (tol 1e-6)"
        ),
    )
}

fn synthetic_config(kind: ExperimentKind, preset: Preset, smoothness: f64, noise: f64, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        experiment: kind,
        preset,
        smoothness,
        noise,
        lambda_count: 11,
        repetitions: reps,
        seed: 2021,
        ..ExperimentConfig::default()
    }
}

struct SweepSummary {
    min_error: f64,
    best_lambda: f64,
    /// At the averaged optimum: every repetition detected exactly the true terms.
    active_exact: bool,
    /// At the averaged optimum: every repetition kept exactly the true groups nonzero.
    nonzero_exact: bool,
    /// At the averaged optimum: smallest true-term GSI over largest other GSI.
    separation: (f64, f64),
    seconds: f64,
}

fn sweep(cfg: &ExperimentConfig) -> SweepSummary {
    let start = Instant::now();
    let report = run_synthetic(cfg).expect("synthetic run");
    let best = report.best_index();
    let truth = TestFunction::new().active_terms();
    let gsi = &report.mean_gsi()[best];
    let mut separation = (f64::INFINITY, 0.0f64);
    for (t, term) in report.terms.iter().enumerate() {
        if term.is_empty() {
            continue;
        }
        if truth.contains(term) {
            separation.0 = separation.0.min(gsi[t]);
        } else {
            separation.1 = separation.1.max(gsi[t]);
        }
    }
    SweepSummary {
        min_error: report.min_error(),
        best_lambda: report.lambdas[best],
        active_exact: report.repetitions.iter().all(|r| r.points[best].active_set == truth),
        nonzero_exact: report.repetitions.iter().all(|r| r.points[best].nonzero == truth),
        separation,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn experiment_small_lsqr() -> Outcome {
    let cfg = synthetic_config(ExperimentKind::SyntheticLsqr, Preset::Small, 0.0, 0.0, 5);
    let s = sweep(&cfg);
    Outcome::check(
        (0.07..=0.12).contains(&s.min_error) && s.active_exact,
        format!(
            "5 reps, min L2 error {:.4} at lambda {:.3} (range [0.07, 0.12], reference 0.091); active set exact: {}; {:.0} s",
            s.min_error, s.best_lambda, s.active_exact, s.seconds
        ),
    )
}

fn experiment_large_lsqr() -> Outcome {
    let cfg = synthetic_config(ExperimentKind::SyntheticLsqr, Preset::Large, 1.5, 0.0, 1);
    let s = sweep(&cfg);
    Outcome::check(
        (0.012..=0.03).contains(&s.min_error),
        format!(
            "1 rep, min L2 error {:.4} at lambda {:.3} (range [0.012, 0.03], reference 0.018); {:.0} s",
            s.min_error, s.best_lambda, s.seconds
        ),
    )
}

fn noisy_experiments() -> Outcome {
    let cases = [
        ("lsqr small", ExperimentKind::SyntheticLsqr, Preset::Small, 0.0, 0.165),
        ("lsqr large", ExperimentKind::SyntheticLsqr, Preset::Large, 1.5, 0.189),
        ("fista small", ExperimentKind::SyntheticFista, Preset::Small, 0.0, 0.202),
        ("fista large", ExperimentKind::SyntheticFista, Preset::Large, 1.5, 0.203),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, kind, preset, s, target) in cases {
        let sum = sweep(&synthetic_config(kind, preset, s, 0.1, 1));
        let within = (sum.min_error - target).abs() <= 0.3 * target;
        let separated = sum.separation.0 > sum.separation.1;
        ok &= within && separated;
        parts.push(format!(
            "{name}: {:.4} vs {target} ({}), GSI {:.1e} > {:.1e} ({}), {:.0} s",
            sum.min_error,
            if within { "ok" } else { "out of ±30%" },
            sum.separation.0,
            sum.separation.1,
            if separated { "ok" } else { "not separated" },
            sum.seconds
        ));
    }
    Outcome::check(ok, format!("1 rep each, 10% relative noise; {}", parts.join("; ")))
}

fn fista_experiments() -> Outcome {
    let cases = [
        ("small", Preset::Small, 0.0, 0.07..=0.12),
        ("large", Preset::Large, 1.5, 0.012..=0.03),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, preset, s, range) in cases {
        let sum = sweep(&synthetic_config(ExperimentKind::SyntheticFista, preset, s, 0.0, 1));
        let good = range.contains(&sum.min_error) && sum.nonzero_exact;
        ok &= good;
        parts.push(format!(
            "{name}: {:.4} in [{}, {}], nonzero groups equal U*: {}, {:.0} s",
            sum.min_error,
            range.start(),
            range.end(),
            sum.nonzero_exact,
            sum.seconds
        ));
    }
    Outcome::check(ok, format!("1 rep each; {}", parts.join("; ")))
}

fn census() -> Outcome {
    if let Ok(path) = std::env::var("ANOVA_CENSUS_DATA") {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Census,
            preset: Preset::Census,
            ..ExperimentConfig::default()
        };
        let rep = run_census(&cfg, std::path::Path::new(&path)).expect("census run");
        let (l2, lasso) = (
            anova_cli::CensusReport::best(&rep.refit_accuracy),
            anova_cli::CensusReport::best(&rep.fista_accuracy),
        );
        return Outcome::check(
            rep.rows == 45199 && rep.index_size == 6319 && l2 >= 85.6 - 0.7 && lasso >= 85.4 - 0.7,
            format!(
                "rows {} (45199), frequencies {} (6319), l2 refit {l2:.2} (>= 85.6 ± 0.7), group lasso {lasso:.2} \
                 (>= 85.4 ± 0.7)",
                rep.rows, rep.index_size
            ),
        );
    }
    let text = synthetic_census_csv(100, 17);
    let data = load_and_preprocess(text.as_bytes(), &Recipe::census()).expect("synthetic table parses");
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Census,
        preset: Preset::Custom(vec![8, 3]),
        lambda_min: 0.5,
        lambda_max: 50.0,
        lambda_count: 4,
        folds: 5,
        seed: 17,
        ..ExperimentConfig::default()
    };
    let a = run_census_on(&cfg, &data).expect("smoke run");
    let b = run_census_on(&cfg, &data).expect("smoke rerun");
    let bounded = [&a.lsqr_accuracy, &a.refit_accuracy, &a.fista_accuracy]
        .iter()
        .all(|v| v.iter().all(|p| (0.0..=100.0).contains(p)));
    Outcome::check(
        bounded && a == b,
        format!(
            "dataset absent, synthetic smoke test: {} rows, best accuracies l2 {:.1} / refit {:.1} / lasso {:.1}, \
             in [0, 100]: {bounded}, deterministic: {}",
            a.rows,
            anova_cli::CensusReport::best(&a.lsqr_accuracy),
            anova_cli::CensusReport::best(&a.refit_accuracy),
            anova_cli::CensusReport::best(&a.fista_accuracy),
            a == b
        ),
    )
}

fn testfun_oracle() -> Outcome {
    let f = TestFunction::new();
    let mut r = rng(9);
    let n = 1usize << 26;
    let mut x = vec![0.0; 9];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        for v in x.iter_mut() {
            *v = r.random::<f64>();
        }
        let v = f.value(&x).powi(2);
        sum += v;
        sum_sq += v * v;
    }
    let mc = sum / n as f64;
    let std_err = ((sum_sq / n as f64 - mc * mc) / n as f64).sqrt();
    let mc_rel = (mc - f.norm_sq()).abs() / f.norm_sq();

    // Coordinates outside a triple integrate to δ_{k_c}, so the 9-d integral is a
    // sum over triples of products of one-dimensional integrals.
    let axis_integral = |order: usize, k: i64| {
        simpson(24_000, |t| {
            Complex64::from_polar(bspline_value(order, t), -2.0 * std::f64::consts::PI * k as f64 * t)
        })
    };
    let quadrature = |k: &[i64]| -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for triple in f.triples() {
            if k.iter().enumerate().all(|(c, &v)| v == 0 || triple.contains(&c)) {
                total += triple.iter().map(|&c| axis_integral(f.order_of(c), k[c])).product::<Complex64>();
            }
        }
        total
    };
    let mut worst_in: f64 = 0.0;
    for _ in 0..50 {
        let triple = f.triples()[r.random_range(0..3)];
        let mut k = vec![0i64; 9];
        for &c in &triple {
            if r.random::<f64>() < 0.7 {
                k[c] = r.random_range(-24..=24);
            }
        }
        worst_in = worst_in.max((quadrature(&k) - Complex64::new(f.coefficient(&k), 0.0)).norm());
    }
    let mut worst_out: f64 = 0.0;
    for _ in 0..50 {
        let mut k = vec![0i64; 9];
        let [t1, t2] = {
            let a = r.random_range(0..3);
            [a, (a + r.random_range(1..3)) % 3]
        };
        k[f.triples()[t1][r.random_range(0..3)]] = r.random_range(1..=20);
        k[f.triples()[t2][r.random_range(0..3)]] = -r.random_range(1..=20);
        worst_out = worst_out.max(f.coefficient(&k).abs());
    }
    Outcome::check(
        mc_rel <= 1e-3 && worst_in <= 1e-6 && worst_out == 0.0,
        format!(
            "Monte Carlo norm {mc:.5} ± {std_err:.1e} vs {:.5} (rel {mc_rel:.1e}, tol 1e-3); quadrature {worst_in:.1e} \
             (tol 1e-6); out-of-support max {worst_out:.1e}",
            f.norm_sq()
        ),
    )
}

fn gsi_algebra() -> Outcome {
    let mut r = rng(10);
    let mut worst_sum: f64 = 0.0;
    let mut monotone = true;
    for seed in 0..50u64 {
        let d = 2 + seed as usize % 4;
        let ds = 1 + seed as usize % d.min(3);
        let bw: Vec<usize> = (0..ds).map(|o| [8, 4, 4][o]).collect();
        let set =
            Arc::new(GroupedIndexSet::with_order_bandwidths(build_term_superset(d, ds).unwrap(), &bw, Basis::Exponential).unwrap());
        let mut values = random_complex(&mut r, set.total_cardinality());
        for t in 0..set.num_terms() {
            if r.random::<f64>() < 0.3 {
                for v in &mut values[set.group_range(t)] {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        let coeffs = GroupedCoefficients::from_values(set, values).unwrap();
        let fit = FitResult::new(coeffs, 1.0, SolverKind::Lsqr, Diagnostics::default()).unwrap();
        if fit.global_variance > 0.0 {
            worst_sum = worst_sum.max((fit.gsi.iter().sum::<f64>() - 1.0).abs());
        }
        let mut previous: Option<TermSet> = None;
        for eps in [0.0, 0.001, 0.01, 0.05, 0.1, 0.3, 0.9] {
            let active = detect_active_set(&fit, &ActiveSetSpec::uniform(eps, ds).unwrap()).unwrap();
            if let Some(prev) = &previous {
                monotone &= active.iter().all(|t| prev.contains(t));
            }
            monotone &= active.contains(&Term::empty());
            previous = Some(active);
        }
    }
    let mut counts_ok = true;
    for d in 1..=4usize {
        for ds in 1..=d.min(3) {
            let set = Arc::new(
                GroupedIndexSet::with_order_bandwidths(build_term_superset(d, ds).unwrap(), &vec![4; ds], Basis::Exponential)
                    .unwrap(),
            );
            let coeffs = GroupedCoefficients::from_values(set.clone(), random_complex(&mut r, set.total_cardinality())).unwrap();
            let fit = FitResult::new(coeffs, 1.0, SolverKind::Lsqr, Diagnostics::default()).unwrap();
            let dot = emit_anova_network(&fit, 0.05);
            let terms = set.terms();
            let edges_in: usize = terms.iter().map(Term::len).sum();
            let faint = terms.iter().zip(&fit.gsi).filter(|(t, g)| !t.is_empty() && **g < 0.05).count();
            counts_ok &= dot.matches("shape=circle").count() == d
                && dot.matches("shape=box").count() == terms.len()
                && dot.matches("shape=doublecircle").count() == 1
                && dot.matches("-> sum;").count() == terms.len()
                && dot.matches(" -> t_").count() == edges_in
                && dot.matches("style=dashed").count() == faint;
        }
    }
    Outcome::check(
        worst_sum <= 1e-12 && monotone && counts_ok,
        format!("GSI sum deviation {worst_sum:.1e}; monotone in epsilon: {monotone}; network counts: {counts_ok}"),
    )
}

type Criterion = (usize, &'static str, bool, fn() -> Outcome);

fn main() -> ExitCode {
    let slow = std::env::var("ANOVA_SLOW").is_ok_and(|v| v == "1");
    let only: Option<Vec<usize>> = std::env::var("ANOVA_CRITERIA")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let criteria: [Criterion; 10] = [
        (1, "transform correctness", false, transform_correctness),
        (2, "prox exactness", false, prox_exactness),
        (3, "solver oracles", false, solver_oracles),
        (4, "small noiseless LSQR", false, experiment_small_lsqr),
        (5, "large noiseless LSQR", true, experiment_large_lsqr),
        (6, "noisy experiments", true, noisy_experiments),
        (7, "FISTA experiments", true, fista_experiments),
        (8, "census", false, census),
        (9, "test function oracle", false, testfun_oracle),
        (10, "GSI algebra", false, gsi_algebra),
    ];
    let mut failed_fast_tier = false;
    for (id, name, is_slow, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = if is_slow && !slow {
            Outcome::skip("slow tier; set ANOVA_SLOW=1")
        } else {
            run()
        };
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed_fast_tier |= !is_slow;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("{tag} [{id}] {name}: {} ({:.1} s)", outcome.detail, start.elapsed().as_secs_f64());
    }
    if failed_fast_tier {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

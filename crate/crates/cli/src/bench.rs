use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::Result;
use grouped_anova::index::{build_term_superset, Basis, GroupedIndexSet};
use grouped_anova::transform::{Method, NodeSet, TransformPlan};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;

pub const BENCH_HEADER: [&str; 7] = ["d", "d_s", "N", "M", "method", "seconds", "max_error"];

/// Timing of one forward transform.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub dimension: usize,
    pub order: usize,
    pub bandwidth: usize,
    pub samples: usize,
    pub method: Method,
    pub seconds: f64,
    /// `max |F f̂ − F_direct f̂| / max |F_direct f̂|`.
    pub max_error: f64,
}

fn fastest(runs: usize, mut f: impl FnMut() -> Vec<Complex64>) -> (Duration, Vec<Complex64>) {
    let mut best = Duration::MAX;
    let mut out = Vec::new();
    for _ in 0..runs.max(1) {
        let t = Instant::now();
        out = f();
        best = best.min(t.elapsed());
    }
    (best, out)
}

/// Direct and fast forward transforms of random coefficients at random nodes.
pub fn run_transform_bench(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    let b = &cfg.bench;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for &order in &b.orders {
        for &bandwidth in &b.bandwidths {
            for &samples in &b.samples {
                let d = b.dimension.max(order);
                let set = Arc::new(GroupedIndexSet::with_order_bandwidths(
                    build_term_superset(d, order)?,
                    &vec![bandwidth; order],
                    Basis::Exponential,
                )?);
                let points: Vec<Vec<f64>> =
                    (0..samples).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
                let nodes = NodeSet::from_points(&points, Basis::Exponential)?;
                let coeffs: Vec<Complex64> = (0..set.total_cardinality())
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let direct = TransformPlan::new(nodes.clone(), set.clone(), Method::Direct, cfg.fast)?;
                let fast = TransformPlan::new(nodes, set.clone(), Method::Fast, cfg.fast)?;
                let (t_direct, exact) = fastest(b.runs, || direct.forward_values(&coeffs).expect("sized"));
                let (t_fast, approx) = fastest(b.runs, || fast.forward_values(&coeffs).expect("sized"));
                let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let err = exact.iter().zip(&approx).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
                for (method, t, e) in [(Method::Direct, t_direct, 0.0), (Method::Fast, t_fast, err)] {
                    rows.push(BenchRow {
                        dimension: d,
                        order,
                        bandwidth,
                        samples,
                        method,
                        seconds: t.as_secs_f64(),
                        max_error: e,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        let method = match r.method {
            Method::Direct => "direct",
            Method::Fast => "fast",
            Method::Auto => "auto",
        };
        w.write_record([
            r.dimension.to_string(),
            r.order.to_string(),
            r.bandwidth.to_string(),
            r.samples.to_string(),
            method.to_string(),
            r.seconds.to_string(),
            r.max_error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

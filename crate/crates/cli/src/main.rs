use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use anova_cli::{
    run_census, run_synthetic, run_transform_bench, write_bench_csv, ExperimentConfig, ExperimentKind, Preset,
    ResultTable,
};
use clap::Parser;
use grouped_anova::model::emit_anova_network;

/// Grouped ANOVA approximation experiments.
#[derive(Debug, Parser)]
#[command(name = "anova", version)]
struct Args {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
    /// small, large, census or a per-order list such as 26,6,4.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    smoothness: Option<f64>,
    /// Relative Gaussian noise level.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_count: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Census data file.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    /// Result CSV; census runs also write `-refit` and `-fista` siblings.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Leave the constant term unpenalized in the group lasso.
    #[arg(long)]
    prox_exempt_mean: bool,
    /// DOT file of the ANOVA network at the best λ.
    #[arg(long)]
    emit_network: Option<PathBuf>,
}

fn merged_config(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.experiment {
        cfg.experiment = v;
    }
    if let Some(v) = &args.preset {
        cfg.preset = Preset::parse(v)?;
    }
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag.clone() { cfg.$field = v; })*
        };
    }
    set!(smoothness => smoothness, noise => noise, samples => samples, lambda_min => lambda_min,
         lambda_max => lambda_max, lambda_count => lambda_count, reps => repetitions, seed => seed,
         folds => folds);
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if args.emit_network.is_some() {
        cfg.emit_network = args.emit_network.clone();
    }
    if args.prox_exempt_mean {
        cfg.fista.exempt_mean = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_table(table: &ResultTable, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            table.write_csv(BufWriter::new(f))
        }
        None => table.write_csv(io::stdout().lock()),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}-{suffix}{ext}"))
}

fn run(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment {
        ExperimentKind::SyntheticLsqr | ExperimentKind::SyntheticFista => {
            let report = run_synthetic(cfg)?;
            let best = report.best_index();
            eprintln!("minimum L2 error {:.6} at lambda {:.6}", report.min_error(), report.lambdas[best]);
            write_table(&report.table(), cfg.output.as_deref())?;
            if let Some(path) = &cfg.emit_network {
                let rep = &report.repetitions[0];
                let threshold = cfg.active_set_spec()?.threshold(1);
                std::fs::write(path, emit_anova_network(&rep.best_fit, threshold))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        ExperimentKind::Census => {
            let Some(data) = &cfg.data else {
                bail!("the census experiment needs --data");
            };
            if cfg.emit_network.is_some() {
                bail!("--emit-network is only supported for synthetic experiments");
            }
            let report = run_census(cfg, data)?;
            eprint!("{}", report.summary());
            match &cfg.output {
                Some(p) => {
                    write_table(&report.lsqr_table(), Some(p))?;
                    write_table(&report.refit_table(), Some(&sibling(p, "refit")))?;
                    write_table(&report.fista_table(), Some(&sibling(p, "fista")))?;
                }
                None => write_table(&report.refit_table(), None)?,
            }
        }
        ExperimentKind::TransformBench => {
            let rows = run_transform_bench(cfg)?;
            match &cfg.output {
                Some(p) => write_bench_csv(&rows, BufWriter::new(File::create(p)?))?,
                None => write_bench_csv(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = merged_config(&args).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        run(&cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

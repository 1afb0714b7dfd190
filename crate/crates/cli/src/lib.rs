//! Experiment drivers for grouped ANOVA approximation: synthetic `λ` sweeps,
//! the census classification pipeline and transform benchmarks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod census;
pub mod config;
pub mod synthetic;
pub mod table;

pub use bench::{run_transform_bench, write_bench_csv, BenchRow};
pub use census::{run_census, run_census_on, synthetic_census_csv, CensusReport};
pub use config::{BenchConfig, ExperimentConfig, ExperimentKind, Preset};
pub use synthetic::{run_synthetic, SyntheticReport};
pub use table::{ResultTable, TableRow};

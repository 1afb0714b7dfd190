use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use grouped_anova::model::ActiveSetSpec;
use grouped_anova::solvers::{FistaConfig, LsqrConfig, SolverConfig, WeightFunction};
use grouped_anova::transform::{FastParams, Method};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    SyntheticLsqr,
    SyntheticFista,
    Census,
    TransformBench,
}

/// Per-order bandwidths `N_1, N_2, …`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `(26, 6, 4)`, 3394 frequencies on `U_3` in nine dimensions.
    #[default]
    Small,
    /// `(352, 20, 8)`, 44968 frequencies on `U_3` in nine dimensions.
    Large,
    /// `(82, 10)` on `U_2` in twelve dimensions, cosine basis.
    Census,
    Custom(Vec<usize>),
}

impl Preset {
    pub fn bandwidths(&self) -> Vec<usize> {
        match self {
            Preset::Small => vec![26, 6, 4],
            Preset::Large => vec![352, 20, 8],
            Preset::Census => vec![82, 10],
            Preset::Custom(b) => b.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "small" => Preset::Small,
            "large" => Preset::Large,
            "census" => Preset::Census,
            other => {
                let parsed: std::result::Result<Vec<usize>, _> = other.split(',').map(|s| s.trim().parse()).collect();
                match parsed {
                    Ok(b) if !b.is_empty() => Preset::Custom(b),
                    _ => bail!("unknown preset {other:?}; expected small, large, census or a list like 26,6,4"),
                }
            }
        })
    }
}

/// Sizes for the transform benchmark; every combination is run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dimension: usize,
    pub orders: Vec<usize>,
    pub bandwidths: Vec<usize>,
    pub samples: Vec<usize>,
    /// Timed runs per measurement; the fastest is reported.
    pub runs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dimension: 1,
            orders: vec![1],
            bandwidths: vec![64],
            samples: vec![100_000],
            runs: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub preset: Preset,
    /// Sobolev smoothness `s` of the regularizer; 0 means `ω ≡ 1`.
    pub smoothness: f64,
    /// Relative Gaussian noise level of the synthetic samples.
    pub noise: f64,
    /// Number of synthetic nodes `M`.
    pub samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Start each `λ` from the previous minimizer.
    pub warm_start: bool,
    /// Active-set thresholds `ε_1, …, ε_{d_s}`; a shorter vector repeats its last entry.
    pub active_set: Option<Vec<f64>>,
    /// Bandwidths of the active-set refit; defaults to the preset.
    pub refit_bandwidths: Option<Vec<usize>>,
    pub lsqr: LsqrConfig,
    pub fista: FistaConfig,
    pub method: Method,
    pub fast: FastParams,
    pub threads: Option<usize>,
    /// Census data file.
    pub data: Option<PathBuf>,
    /// Cross-validation folds; 1 means a single 80/20 split.
    pub folds: usize,
    pub bench: BenchConfig,
    pub output: Option<PathBuf>,
    pub emit_network: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::default(),
            preset: Preset::default(),
            smoothness: 0.0,
            noise: 0.0,
            samples: 10_000,
            lambda_min: 1.0,
            lambda_max: 10f64.exp(),
            lambda_count: 50,
            repetitions: 10,
            seed: 0,
            warm_start: true,
            active_set: None,
            refit_bandwidths: None,
            lsqr: LsqrConfig::default(),
            fista: FistaConfig::default(),
            method: Method::default(),
            fast: FastParams::default(),
            threads: None,
            data: None,
            folds: 10,
            bench: BenchConfig::default(),
            output: None,
            emit_network: None,
        }
    }
}

/// Synthetic active-set threshold used when none is configured.
pub const DEFAULT_SYNTHETIC_EPSILON: f64 = 0.001;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("invalid experiment config")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0) || !self.lambda_min.is_finite() {
            bail!("lambda_min must be positive, got {}", self.lambda_min);
        }
        if !(self.lambda_max >= self.lambda_min) || !self.lambda_max.is_finite() {
            bail!("lambda_max {} must be finite and at least lambda_min {}", self.lambda_max, self.lambda_min);
        }
        if self.lambda_count == 0 {
            bail!("lambda_count must be positive");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        if self.samples == 0 {
            bail!("samples must be positive");
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            bail!("noise level must be nonnegative, got {}", self.noise);
        }
        if self.folds == 0 {
            bail!("folds must be positive");
        }
        if self.preset.bandwidths().is_empty() {
            bail!("empty bandwidth list");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        self.weight()?;
        self.fast.validate()?;
        self.lsqr.validate()?;
        self.fista.validate()?;
        self.active_set_spec()?;
        Ok(())
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        Ok(grouped_anova::solvers::log_grid(self.lambda_min, self.lambda_max, self.lambda_count)?)
    }

    pub fn weight(&self) -> Result<WeightFunction> {
        if self.smoothness == 0.0 {
            Ok(WeightFunction::Constant)
        } else {
            Ok(WeightFunction::sobolev(self.smoothness)?)
        }
    }

    /// Solver of a synthetic run; the census run uses both.
    pub fn solver(&self) -> Result<SolverConfig> {
        Ok(match self.experiment {
            ExperimentKind::SyntheticFista => SolverConfig::Fista(self.fista.clone()),
            _ => SolverConfig::Lsqr(self.lsqr.clone()),
        })
    }

    pub fn active_set_spec(&self) -> Result<ActiveSetSpec> {
        let thresholds = match (&self.active_set, self.experiment) {
            (Some(t), _) => t.clone(),
            (None, ExperimentKind::Census) => vec![0.1, 0.1],
            (None, _) => vec![DEFAULT_SYNTHETIC_EPSILON],
        };
        Ok(ActiveSetSpec::new(thresholds)?)
    }

    pub fn refit_bandwidths(&self) -> Vec<usize> {
        match (&self.refit_bandwidths, self.experiment) {
            (Some(b), _) => b.clone(),
            (None, ExperimentKind::Census) if self.preset == Preset::Census => vec![300, 10],
            (None, _) => self.preset.bandwidths(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment":"synthetic-fista","preset":"large","smoothness":1.5}"#)
            .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::SyntheticFista);
        assert_eq!(cfg.preset.bandwidths(), vec![352, 20, 8]);
        assert_eq!(cfg.lambda_count, 50);
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let custom = ExperimentConfig::from_json(r#"{"preset":{"custom":[8,4]}}"#).unwrap();
        assert_eq!(custom.preset, Preset::Custom(vec![8, 4]));
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            ExperimentConfig { lambda_min: 0.0, ..Default::default() },
            ExperimentConfig { lambda_max: 0.5, ..Default::default() },
            ExperimentConfig { repetitions: 0, ..Default::default() },
            ExperimentConfig { smoothness: -1.0, ..Default::default() },
            ExperimentConfig { active_set: Some(vec![1.5]), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(ExperimentConfig::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn preset_parsing() {
        assert_eq!(Preset::parse("small").unwrap(), Preset::Small);
        assert_eq!(Preset::parse("300, 10").unwrap(), Preset::Custom(vec![300, 10]));
        assert!(Preset::parse("huge").is_err());
    }

    #[test]
    fn census_defaults() {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Census,
            preset: Preset::Census,
            ..Default::default()
        };
        assert_eq!(cfg.refit_bandwidths(), vec![300, 10]);
        assert_eq!(cfg.active_set_spec().unwrap().thresholds(), &[0.1, 0.1]);
    }
}

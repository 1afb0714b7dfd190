//! Tabular data ingestion for binary classification: column recipes,
//! categorical encoding, min-max normalization, splits and scoring.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Basis;
use crate::transform::{FastParams, GroupedCoefficients, Method, NodeSet, TransformPlan};

/// How to turn a raw CSV into features and binary labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Recipe {
    /// Column names for files without a header row.
    pub columns: Option<Vec<String>>,
    pub drop: Vec<String>,
    pub label: String,
    /// Cell values marking a missing entry; rows containing one are removed.
    pub missing: Vec<String>,
    /// Label values mapped to 1; everything else maps to 0.
    pub positive: Vec<String>,
}

impl Default for Recipe {
    fn default() -> Self {
        Recipe {
            columns: None,
            drop: Vec::new(),
            label: "label".into(),
            missing: vec!["?".into()],
            positive: vec!["1".into()],
        }
    }
}

impl Recipe {
    /// Recipe for the UCI adult census data.
    pub fn census() -> Self {
        let names = [
            "age",
            "workclass",
            "fnlwgt",
            "education",
            "education-num",
            "marital-status",
            "occupation",
            "relationship",
            "race",
            "sex",
            "capital-gain",
            "capital-loss",
            "hours-per-week",
            "native-country",
            "income",
        ];
        Recipe {
            columns: Some(names.iter().map(|s| s.to_string()).collect()),
            drop: vec!["education".into(), "fnlwgt".into()],
            label: "income".into(),
            missing: vec!["?".into()],
            positive: vec![">50K".into(), ">50K.".into()],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: ColumnKind,
    /// Category names in code order (first appearance).
    pub categories: Vec<String>,
}

/// Encoded features (row-major, not yet normalized) with binary labels.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularDataset {
    pub columns: Vec<FeatureColumn>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl TabularDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.columns.len()
    }

    pub fn select(&self, idx: &[usize]) -> TabularDataset {
        TabularDataset {
            columns: self.columns.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

fn is_missing(cell: &str, recipe: &Recipe) -> bool {
    cell.is_empty() || recipe.missing.iter().any(|m| m == cell)
}

/// Reads a CSV, drops configured columns and incomplete rows, and encodes
/// categoricals by first appearance. Blank lines are skipped.
pub fn load_and_preprocess<R: Read>(source: R, recipe: &Recipe) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(recipe.columns.is_none())
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'|'))
        .from_reader(source);
    let header: Vec<String> = match &recipe.columns {
        Some(names) => names.clone(),
        None => reader.headers()?.iter().map(str::to_string).collect(),
    };
    for name in recipe.drop.iter().chain(std::iter::once(&recipe.label)) {
        if !header.contains(name) {
            return Err(Error::UnknownColumn(name.clone()));
        }
    }
    let label_at = header.iter().position(|h| *h == recipe.label).expect("checked above");
    let feature_at: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_at && !recipe.drop.contains(&header[i]))
        .collect();

    let mut raw: Vec<Vec<String>> = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() == 1 && record.get(0).is_some_and(str::is_empty) {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::DimensionMismatch { expected: header.len(), got: record.len() });
        }
        let label = record.get(label_at).unwrap_or("");
        if is_missing(label, recipe) || feature_at.iter().any(|&i| is_missing(&record[i], recipe)) {
            continue;
        }
        labels.push(u8::from(recipe.positive.iter().any(|p| p == label)));
        raw.push(feature_at.iter().map(|&i| record[i].to_string()).collect());
    }
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut columns = Vec::with_capacity(feature_at.len());
    let mut encoded = vec![vec![0.0; feature_at.len()]; raw.len()];
    for (c, &i) in feature_at.iter().enumerate() {
        let numeric: Option<Vec<f64>> = raw.iter().map(|r| r[c].parse::<f64>().ok()).collect();
        match numeric {
            Some(values) => {
                for (row, v) in encoded.iter_mut().zip(values) {
                    row[c] = v;
                }
                columns.push(FeatureColumn {
                    name: header[i].clone(),
                    kind: ColumnKind::Numeric,
                    categories: Vec::new(),
                });
            }
            None => {
                let mut codes: HashMap<&str, usize> = HashMap::new();
                let mut categories = Vec::new();
                for (row, r) in encoded.iter_mut().zip(&raw) {
                    let next = codes.len();
                    let code = *codes.entry(r[c].as_str()).or_insert_with(|| {
                        categories.push(r[c].clone());
                        next
                    });
                    row[c] = code as f64;
                }
                columns.push(FeatureColumn {
                    name: header[i].clone(),
                    kind: ColumnKind::Categorical,
                    categories,
                });
            }
        }
    }
    Ok(TabularDataset { columns, rows: encoded, labels })
}

pub fn load_path(path: &Path, recipe: &Recipe) -> Result<TabularDataset> {
    load_and_preprocess(std::fs::File::open(path)?, recipe)
}

/// Per-column min-max scaling fitted on one set of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?;
        let mut min = first.clone();
        let mut max = first.clone();
        for r in rows {
            for (j, &v) in r.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Normalizer { min, max })
    }

    /// Scales into `[0,1]`, clamping values outside the fitted range. Constant columns map to 0.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let range = self.max[j] - self.min[j];
                if range > 0.0 {
                    ((v - self.min[j]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Seeded shuffle, then the first `floor(fraction · n)` rows train.
pub fn split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let idx = shuffled(n, seed);
    let cut = (train_fraction * n as f64).floor() as usize;
    Ok((idx[..cut].to_vec(), idx[cut..].to_vec()))
}

/// One train/test partition of a cross-validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded partition into `k` folds whose sizes differ by at most one.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("cannot split {n} rows into {k} folds")));
    }
    let idx = shuffled(n, seed);
    let (base, extra) = (n / k, n % k);
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for f in 0..k {
        bounds.push(bounds[f] + base + usize::from(f < extra));
    }
    Ok((0..k)
        .map(|f| {
            let test = idx[bounds[f]..bounds[f + 1]].to_vec();
            let train = idx[..bounds[f]].iter().chain(&idx[bounds[f + 1]..]).copied().collect();
            Fold { train, test }
        })
        .collect())
}

/// Normalized node sets and labels for one train/test partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedSplit {
    pub train_nodes: NodeSet,
    pub train_labels: Vec<u8>,
    pub test_nodes: NodeSet,
    pub test_labels: Vec<u8>,
    pub normalizer: Normalizer,
}

/// Fits the normalizer on the training rows and builds cosine-basis node sets.
pub fn prepare_split(data: &TabularDataset, train: &[usize], test: &[usize]) -> Result<PreparedSplit> {
    let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| data.rows[i].clone()).collect();
    let normalizer = Normalizer::fit(&train_rows)?;
    let test_rows: Vec<Vec<f64>> = test.iter().map(|&i| data.rows[i].clone()).collect();
    Ok(PreparedSplit {
        train_nodes: NodeSet::from_points(&normalizer.apply_all(&train_rows), Basis::Cosine)?,
        train_labels: train.iter().map(|&i| data.labels[i]).collect(),
        test_nodes: NodeSet::from_points(&normalizer.apply_all(&test_rows), Basis::Cosine)?,
        test_labels: test.iter().map(|&i| data.labels[i]).collect(),
        normalizer,
    })
}

pub fn labels_as_samples(labels: &[u8]) -> Vec<Complex64> {
    labels.iter().map(|&l| Complex64::new(f64::from(l), 0.0)).collect()
}

/// Confusion counts of a binary classifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub true_negative: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative
    }

    /// Percentage of correct predictions.
    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        100.0 * (self.true_positive + self.true_negative) as f64 / self.total() as f64
    }

    pub fn merge(&self, other: &Confusion) -> Confusion {
        Confusion {
            true_positive: self.true_positive + other.true_positive,
            true_negative: self.true_negative + other.true_negative,
            false_positive: self.false_positive + other.false_positive,
            false_negative: self.false_negative + other.false_negative,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// `p = 100 (1 − mean |prediction − label|)`; the fold mean when several folds are combined.
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub confusion: Confusion,
}

impl ClassificationReport {
    /// Averages fold reports.
    pub fn combine(reports: &[ClassificationReport]) -> ClassificationReport {
        let folds: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
        let confusion = reports.iter().fold(Confusion::default(), |acc, r| acc.merge(&r.confusion));
        ClassificationReport {
            accuracy: folds.iter().sum::<f64>() / folds.len().max(1) as f64,
            fold_accuracies: folds,
            confusion,
        }
    }
}

/// Scores model values against labels with the decision rule `value ≥ 0.5`.
pub fn score_predictions(values: &[Complex64], labels: &[u8]) -> Result<ClassificationReport> {
    if values.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: values.len() });
    }
    let mut c = Confusion::default();
    let mut wrong = 0usize;
    for (v, &l) in values.iter().zip(labels) {
        if l > 1 {
            return Err(Error::InvalidLabel(l.to_string()));
        }
        let predicted = u8::from(v.re >= 0.5);
        wrong += usize::from(predicted != l);
        match (predicted, l) {
            (1, 1) => c.true_positive += 1,
            (0, 0) => c.true_negative += 1,
            (1, 0) => c.false_positive += 1,
            _ => c.false_negative += 1,
        }
    }
    let accuracy = if labels.is_empty() {
        0.0
    } else {
        100.0 * (1.0 - wrong as f64 / labels.len() as f64)
    };
    Ok(ClassificationReport {
        accuracy,
        fold_accuracies: vec![accuracy],
        confusion: c,
    })
}

/// Evaluates the cosine partial sum at the test nodes and scores it.
pub fn classify_and_score(
    coeffs: &GroupedCoefficients,
    test_nodes: &NodeSet,
    labels: &[u8],
    method: Method,
    params: FastParams,
) -> Result<ClassificationReport> {
    let set: Arc<_> = coeffs.index_set().clone();
    let plan = TransformPlan::new(test_nodes.clone(), set, method, params)?;
    score_predictions(&plan.forward(coeffs)?, labels)
}

//! Datasets: Gaussian blob generation, CSV ingestion, per-feature scaling and
//! seeded train/test subsampling.
//!
//! # Random streams
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.9). Uniform doubles are `(next_u64 >> 11) · 2⁻⁵³`. Normal deviates come
//! from the Marsaglia polar method, using both outputs of each accepted pair.
//! A cluster index is `⌊U · k⌋`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkmError, Result};
use crate::seed::{derive_seed, domain, rng_from_seed};

const WINE_CSV: &str = include_str!("../data/wine.csv");
const IRIS_CSV: &str = include_str!("../data/iris.csv");

pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    pub feature_names: Option<Vec<String>>,
    pub provenance: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn num_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |m| m + 1)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Keeps only the feature columns in `columns`, in that order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Dataset> {
        let dim = self.dim();
        if columns.is_empty() {
            return Err(QkmError::Argument("no feature columns selected".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= dim) {
            return Err(QkmError::Argument(format!(
                "feature index {bad} out of range for {dim} features"
            )));
        }
        Ok(Dataset {
            features: self
                .features
                .iter()
                .map(|row| columns.iter().map(|&c| row[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| columns.iter().map(|&c| names[c].clone()).collect()),
            provenance: format!("{} features {columns:?}", self.provenance),
        })
    }

    /// CSV with header `f0,…,f{P−1}` plus `label` when labels exist, followed
    /// by any `extra` integer columns.
    pub fn to_csv_with(&self, extra: &[(&str, &[usize])]) -> String {
        let mut header: Vec<String> = (0..self.dim()).map(|p| format!("f{p}")).collect();
        if self.labels.is_some() {
            header.push(LABEL_COLUMN.to_string());
        }
        header.extend(extra.iter().map(|(name, _)| name.to_string()));
        let mut out = header.join(",");
        out.push('\n');
        for (i, row) in self.features.iter().enumerate() {
            let mut fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            if let Some(labels) = &self.labels {
                fields.push(labels[i].to_string());
            }
            fields.extend(extra.iter().map(|(_, col)| col[i].to_string()));
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.to_csv_with(&[])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| QkmError::io(path, e))
    }
}

/// Parameters of a Gaussian blob dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub n_points: usize,
    pub dims: usize,
    pub k_clusters: usize,
    pub std: f64,
    pub mean_range: (f64, f64),
    pub seed: u64,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 || self.dims == 0 || self.k_clusters == 0 {
            return Err(QkmError::Argument(
                "n_points, dims and k_clusters must be positive".into(),
            ));
        }
        if !(self.std.is_finite() && self.std > 0.0) {
            return Err(QkmError::Argument(format!(
                "std must be positive, got {}",
                self.std
            )));
        }
        let (lo, hi) = self.mean_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(QkmError::Argument(format!(
                "mean range [{lo}, {hi}] is empty"
            )));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Marsaglia polar method with the spare deviate kept for the next call.
struct PolarNormal {
    spare: Option<f64>,
}

impl PolarNormal {
    fn new() -> Self {
        Self { spare: None }
    }

    fn sample(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * uniform(rng) - 1.0;
            let v = 2.0 * uniform(rng) - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Isotropic Gaussian clusters around uniformly drawn centres.
///
/// Draw order: all `k · dims` centre coordinates first, then for each point
/// its cluster index followed by its `dims` normal deviates.
pub fn make_blobs(spec: &BlobSpec) -> Result<(Dataset, Vec<Vec<f64>>)> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let (lo, hi) = spec.mean_range;
    let centers: Vec<Vec<f64>> = (0..spec.k_clusters)
        .map(|_| {
            (0..spec.dims)
                .map(|_| lo + (hi - lo) * uniform(&mut rng))
                .collect()
        })
        .collect();
    let mut normal = PolarNormal::new();
    let mut features = Vec::with_capacity(spec.n_points);
    let mut labels = Vec::with_capacity(spec.n_points);
    for _ in 0..spec.n_points {
        let c = ((uniform(&mut rng) * spec.k_clusters as f64) as usize).min(spec.k_clusters - 1);
        features.push(
            centers[c]
                .iter()
                .map(|m| m + spec.std * normal.sample(&mut rng))
                .collect(),
        );
        labels.push(c);
    }
    let dataset = Dataset {
        features,
        labels: Some(labels),
        feature_names: None,
        provenance: format!(
            "blobs n={} dims={} k={} std={} range=[{}, {}] seed={}",
            spec.n_points, spec.dims, spec.k_clusters, spec.std, lo, hi, spec.seed
        ),
    };
    Ok((dataset, centers))
}

/// Parses CSV text with one header row. Every column except `label_column`
/// must be numeric; label values are mapped to `0, 1, …` in order of first
/// appearance.
pub fn parse_csv(text: &str, origin: &str, label_column: Option<&str>) -> Result<Dataset> {
    let parse_err = |line: u64, message: String| QkmError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(parse_err(1, "missing header row".into()));
    }
    let label_idx =
        match label_column {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
                QkmError::Data(format!("{origin}: no label column named {name:?}"))
            })?),
            None => None,
        };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| Some(c) != label_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(parse_err(1, "no feature columns".into()));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("{} fields, header has {}", record.len(), headers.len()),
            ));
        }
        let row = feature_cols
            .iter()
            .map(|&c| {
                record[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_err(
                            line,
                            format!("column {:?}: {:?} is not a number", headers[c], &record[c]),
                        )
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        features.push(row);
        if let Some(li) = label_idx {
            let next = label_ids.len();
            labels.push(*label_ids.entry(record[li].to_string()).or_insert(next));
        }
    }
    Ok(Dataset {
        features,
        labels: label_idx.map(|_| labels),
        feature_names: Some(feature_cols.iter().map(|&c| headers[c].clone()).collect()),
        provenance: origin.to_string(),
    })
}

pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| QkmError::io(path, e))?;
    parse_csv(&text, &path.display().to_string(), label_column)
}

/// The Wine (178 × 13, 3 classes) and Iris (150 × 4, 3 classes) tables
/// shipped with the crate.
pub fn bundled(name: &str) -> Result<Dataset> {
    let text = match name {
        "wine" => WINE_CSV,
        "iris" => IRIS_CSV,
        other => {
            return Err(QkmError::Argument(format!(
                "no bundled dataset named {other:?} (expected wine or iris)"
            )))
        }
    };
    parse_csv(text, &format!("bundled:{name}"), Some(LABEL_COLUMN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleTarget {
    None,
    UnitInterval,
    /// `[0, 2π)`: the top of the range maps to the largest double below 2π.
    AngleInterval,
    Standardize,
}

impl ScaleTarget {
    fn interval(self) -> Option<(f64, f64)> {
        match self {
            ScaleTarget::UnitInterval => Some((0.0, 1.0)),
            ScaleTarget::AngleInterval => Some((0.0, TAU.next_down())),
            _ => None,
        }
    }
}

/// Per-feature affine map fitted on one dataset and reusable on others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedScaler {
    pub target: ScaleTarget,
    /// Feature minimum (interval targets) or mean (standardize).
    pub center: Vec<f64>,
    /// Feature range (interval targets) or standard deviation; 0 marks a
    /// constant feature.
    pub spread: Vec<f64>,
}

impl FittedScaler {
    pub fn fit(data: &[Vec<f64>], target: ScaleTarget) -> Result<Self> {
        let dim = data.first().map_or(0, Vec::len);
        if data.is_empty() || dim == 0 {
            return Err(QkmError::InsufficientData(
                "cannot fit a scaler on no data".into(),
            ));
        }
        let column = |p: usize| data.iter().map(move |row| row[p]);
        let (center, spread) = match target {
            ScaleTarget::Standardize => (0..dim)
                .map(|p| {
                    let n = data.len() as f64;
                    let mean = column(p).sum::<f64>() / n;
                    let var = column(p).map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    (mean, var.sqrt())
                })
                .unzip(),
            _ => (0..dim)
                .map(|p| {
                    let min = column(p).fold(f64::INFINITY, f64::min);
                    let max = column(p).fold(f64::NEG_INFINITY, f64::max);
                    (min, max - min)
                })
                .unzip(),
        };
        Ok(Self {
            target,
            center,
            spread,
        })
    }

    fn forward(&self, p: usize, x: f64) -> f64 {
        let (center, spread) = (self.center[p], self.spread[p]);
        match (self.target, self.target.interval()) {
            (ScaleTarget::None, _) => x,
            (ScaleTarget::Standardize, _) if spread > 0.0 => (x - center) / spread,
            (ScaleTarget::Standardize, _) => 0.0,
            (_, Some((lo, hi))) if spread > 0.0 => {
                (lo + (x - center) / spread * (hi - lo)).clamp(lo, hi)
            }
            (_, Some((lo, hi))) => 0.5 * (lo + hi),
            (_, None) => unreachable!("interval targets always have bounds"),
        }
    }

    fn backward(&self, p: usize, y: f64) -> f64 {
        let (center, spread) = (self.center[p], self.spread[p]);
        match (self.target, self.target.interval()) {
            (ScaleTarget::None, _) => y,
            (_, _) if spread == 0.0 => center,
            (ScaleTarget::Standardize, _) => center + y * spread,
            (_, Some((lo, hi))) => center + (y - lo) / (hi - lo) * spread,
            (_, None) => unreachable!("interval targets always have bounds"),
        }
    }

    /// Applies the map; interval targets clip values outside the fitted range.
    pub fn transform(&self, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        data.iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != self.center.len() {
                    return Err(QkmError::Shape(format!(
                        "row {i} has {} features, scaler expects {}",
                        row.len(),
                        self.center.len()
                    )));
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(p, &x)| self.forward(p, x))
                    .collect())
            })
            .collect()
    }

    pub fn inverse_transform(&self, data: &[Vec<f64>]) -> Vec<Vec<f64>> {
        data.iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(p, &y)| self.backward(p, y))
                    .collect()
            })
            .collect()
    }
}

/// Fits a scaler on `data` and returns the scaled copy with it.
pub fn scale_features(data: &Dataset, target: ScaleTarget) -> Result<(Dataset, FittedScaler)> {
    let scaler = FittedScaler::fit(&data.features, target)?;
    let scaled = Dataset {
        features: scaler.transform(&data.features)?,
        ..data.clone()
    };
    Ok((scaled, scaler))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

fn quotas(total: usize, classes: usize) -> Vec<usize> {
    (0..classes)
        .map(|c| total / classes + usize::from(c < total % classes))
        .collect()
}

/// Disjoint seeded train/test subsets. Stratified mode gives every class
/// `n / C` rows, with the remainder going to the lowest class indices.
/// Indices within each subset are returned in ascending order.
pub fn subsample_split(
    data: &Dataset,
    n_train: usize,
    n_test: usize,
    stratified: bool,
    seed: u64,
) -> Result<Split> {
    if n_train + n_test > data.len() {
        return Err(QkmError::InsufficientData(format!(
            "{n_train} train + {n_test} test rows requested from {}",
            data.len()
        )));
    }
    let mut rng = rng_from_seed(derive_seed(seed, &[domain::SPLIT]));
    let (mut train, mut test) = if stratified {
        let labels = data
            .labels
            .as_ref()
            .ok_or_else(|| QkmError::Data("stratified split needs labels".into()))?;
        let classes = data.num_classes();
        let train_q = quotas(n_train, classes);
        let test_q = quotas(n_test, classes);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for c in 0..classes {
            let mut members: Vec<usize> = (0..data.len()).filter(|&i| labels[i] == c).collect();
            if members.len() < train_q[c] + test_q[c] {
                return Err(QkmError::InsufficientData(format!(
                    "class {c} has {} rows, split needs {}",
                    members.len(),
                    train_q[c] + test_q[c]
                )));
            }
            members.shuffle(&mut rng);
            train.extend_from_slice(&members[..train_q[c]]);
            test.extend_from_slice(&members[train_q[c]..train_q[c] + test_q[c]]);
        }
        (train, test)
    } else {
        let mut all: Vec<usize> = (0..data.len()).collect();
        all.shuffle(&mut rng);
        (
            all[..n_train].to_vec(),
            all[n_train..n_train + n_test].to_vec(),
        )
    };
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train: data.subset(&train),
        test: data.subset(&test),
        train_indices: train,
        test_indices: test,
    })
}

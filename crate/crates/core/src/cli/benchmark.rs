//! Four-algorithm comparison on repeated stratified train/test splits.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    bundled, make_blobs, subsample_split, BlobSpec, Dataset, FittedScaler, ScaleTarget,
};
use crate::distance::SampleMode;
use crate::error::{QkmError, Result};
use crate::kmeans::{self, DistanceKind, InitMethod, KMeansConfig};
use crate::seed::{derive_seed, domain};
use crate::svm::{fit_ovr, predict_ovr, rbf_gamma_scale, KernelSpec, SmoConfig};

pub const ALGORITHMS: [&str; 4] = [
    "Classical SVM",
    "Quantum SVM",
    "Classical K-means",
    "Quantum K-means",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BenchDataset {
    Wine,
    Iris,
    Blobs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub dataset: BenchDataset,
    pub trials: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` picks the dataset default: wine (0, 6), iris (0, 1), blobs all.
    pub features: Option<Vec<usize>>,
    pub seed: u64,
    pub restarts: usize,
    /// Shots for the quantum algorithms; `None` uses exact probabilities.
    pub shots: Option<u64>,
    pub c: f64,
    /// Scaling fitted on the training split for both SVMs. K-means always
    /// clusters unit-interval-scaled test inputs.
    pub svm_scale: ScaleTarget,
    pub blobs: BlobSpec,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            dataset: BenchDataset::Wine,
            trials: 5,
            n_train: 30,
            n_test: 30,
            features: None,
            seed: 0,
            restarts: 10,
            shots: Some(crate::distance::DEFAULT_SHOTS),
            c: 1.0,
            svm_scale: ScaleTarget::AngleInterval,
            blobs: BlobSpec {
                n_points: 100,
                dims: 5,
                k_clusters: 3,
                std: 3.0,
                mean_range: (-10.0, 10.0),
                seed: 0,
            },
        }
    }
}

impl BenchmarkConfig {
    pub fn feature_indices(&self) -> Option<Vec<usize>> {
        self.features.clone().or(match self.dataset {
            BenchDataset::Wine => Some(vec![0, 6]),
            BenchDataset::Iris => Some(vec![0, 1]),
            BenchDataset::Blobs => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(QkmError::Argument("trials must be at least 1".into()));
        }
        if self.n_train == 0 {
            return Err(QkmError::Argument("n_train must be at least 1".into()));
        }
        if self.n_test == 0 {
            return Err(QkmError::Argument("n_test must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(QkmError::Argument("restarts must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(QkmError::Argument("shot count must be at least 1".into()));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(QkmError::Argument("C must be positive".into()));
        }
        if self.dataset == BenchDataset::Blobs {
            self.blobs.validate()?;
        }
        Ok(())
    }

    pub fn load(&self) -> Result<Dataset> {
        let data = match self.dataset {
            BenchDataset::Wine => bundled("wine")?,
            BenchDataset::Iris => bundled("iris")?,
            BenchDataset::Blobs => make_blobs(&self.blobs)?.0,
        };
        match self.feature_indices() {
            Some(cols) => data.select_features(&cols),
            None => Ok(data),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: String,
    pub trials: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub features: Option<Vec<usize>>,
    pub results: Vec<AlgorithmResult>,
    /// Seconds per trial and algorithm. Only filled when requested, since
    /// timings differ between otherwise identical runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_times: Option<Vec<[f64; 4]>>,
}

impl BenchmarkReport {
    pub fn mean_of(&self, algorithm: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.algorithm == algorithm)
            .map(|r| r.mean)
    }

    /// Fixed-width table with one row per algorithm.
    pub fn table(&self) -> String {
        let width = ALGORITHMS.iter().map(|a| a.len()).max().unwrap_or(0);
        let mut out = format!("{:<width$}  {:>8}  trials\n", "Algorithm", "Accuracy");
        for r in &self.results {
            let trials: Vec<String> = r.trials.iter().map(|a| format!("{:.3}", a)).collect();
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.1}%  {}",
                r.algorithm,
                100.0 * r.mean,
                trials.join(" ")
            );
        }
        out
    }
}

struct TrialOutcome {
    accuracies: [f64; 4],
    seconds: [f64; 4],
}

fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Clusters the (unlabeled) test inputs and scores them under the best
/// cluster-to-class matching. No training data is involved.
fn kmeans_accuracy(
    test: &[Vec<f64>],
    labels: &[usize],
    k: usize,
    distance: DistanceKind,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    let config = KMeansConfig {
        restarts,
        seed,
        init: InitMethod::RandomPoints,
        ..KMeansConfig::new(k, distance)
    };
    let model = kmeans::fit(test, &config)?;
    kmeans::cluster_accuracy(&model.assignments, labels)
}

fn run_trial(config: &BenchmarkConfig, data: &Dataset, trial: usize) -> Result<TrialOutcome> {
    let seed = derive_seed(config.seed, &[domain::TRIAL, trial as u64]);
    let split = subsample_split(data, config.n_train, config.n_test, true, seed)?;
    let train_labels = split
        .train
        .labels
        .clone()
        .expect("benchmark data is labeled");
    let test_labels = split
        .test
        .labels
        .clone()
        .expect("benchmark data is labeled");
    let classes = data.num_classes();

    let svm_scale = FittedScaler::fit(&split.train.features, config.svm_scale)?;
    let train_svm = svm_scale.transform(&split.train.features)?;
    let test_svm = svm_scale.transform(&split.test.features)?;
    let test_unit = FittedScaler::fit(&split.test.features, ScaleTarget::UnitInterval)?
        .transform(&split.test.features)?;

    let smo = SmoConfig {
        c: config.c,
        seed,
        ..SmoConfig::default()
    };
    let mode = config.shots.map_or(SampleMode::Exact, SampleMode::Shots);
    let quantum_distance = config
        .shots
        .map_or(DistanceKind::QuantumExact, DistanceKind::QuantumShots);

    let mut accuracies = [0.0; 4];
    let mut seconds = [0.0; 4];
    for (slot, (acc, secs)) in accuracies.iter_mut().zip(seconds.iter_mut()).enumerate() {
        let start = Instant::now();
        *acc = match slot {
            0 | 1 => {
                let kernel = if slot == 0 {
                    KernelSpec::Rbf {
                        gamma: rbf_gamma_scale(&train_svm),
                    }
                } else {
                    KernelSpec::Quantum { mode, seed }
                };
                let model = fit_ovr(&train_svm, &train_labels, classes, kernel, &smo)?;
                accuracy(&predict_ovr(&model, &test_svm)?, &test_labels)
            }
            _ => {
                let distance = if slot == 2 {
                    DistanceKind::Classical
                } else {
                    quantum_distance
                };
                kmeans_accuracy(
                    &test_unit,
                    &test_labels,
                    classes,
                    distance,
                    config.restarts,
                    seed,
                )?
            }
        };
        *secs = start.elapsed().as_secs_f64();
    }
    Ok(TrialOutcome {
        accuracies,
        seconds,
    })
}

/// Runs every trial (in parallel) and collects accuracies in trial order.
pub fn run_benchmark(config: &BenchmarkConfig, timings: bool) -> Result<BenchmarkReport> {
    config.validate()?;
    let data = config.load()?;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &data, t))
        .collect::<Result<_>>()?;
    let results = ALGORITHMS
        .iter()
        .enumerate()
        .map(|(slot, name)| {
            let trials: Vec<f64> = outcomes.iter().map(|o| o.accuracies[slot]).collect();
            let mean = trials.iter().sum::<f64>() / trials.len() as f64;
            AlgorithmResult {
                algorithm: name.to_string(),
                trials,
                mean,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        config: config.clone(),
        features: config.feature_indices(),
        results,
        wall_times: timings.then(|| outcomes.iter().map(|o| o.seconds).collect()),
    })
}

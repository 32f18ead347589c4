//! Kernel SVM: an SMO dual solver, the decision function
//! `f(x) = Σ αᵢ yᵢ K(xᵢ, x) + b`, and a one-against-rest multiclass wrapper.
//!
//! Everything runs on precomputed kernel matrices, so the same solver serves
//! the feature-map kernel, an RBF baseline and user-supplied Gram files.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::SampleMode;
use crate::error::{QkmError, Result};
use crate::qkernel::{kernel_cross, kernel_gram};
use crate::seed::{derive_seed, domain, rng_from_seed};

/// Multipliers closer than this to 0 or C are treated as on the bound.
const BOUND_EPS: f64 = 1e-8;
/// Smallest accepted change of the second multiplier in one step.
const MIN_STEP: f64 = 1e-5;
/// Diagonal jitter schedule tried when a solve does not converge.
const JITTER_SCHEDULE: [f64; 6] = [0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoConfig {
    pub c: f64,
    pub tolerance: f64,
    /// Consecutive sweeps without an accepted step needed to stop.
    pub max_passes: usize,
    /// Hard cap on sweeps; hitting it marks the solution non-converged.
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 50,
            max_sweeps: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub support_indices: Vec<usize>,
    pub labels: Vec<i8>,
    pub regularization_c: f64,
    pub converged: bool,
    /// Diagonal jitter that was added to the kernel matrix.
    pub jitter: f64,
    /// Dual objective after every accepted step, starting from α = 0.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

#[allow(clippy::needless_range_loop)]
fn check_gram(gram: &[Vec<f64>], n: usize) -> Result<()> {
    if gram.len() != n || gram.iter().any(|r| r.len() != n) {
        return Err(QkmError::Shape(format!("kernel matrix is not {n}×{n}")));
    }
    for i in 0..n {
        for j in 0..n {
            if !gram[i][j].is_finite() {
                return Err(QkmError::Data(format!(
                    "kernel entry ({i}, {j}) is not finite"
                )));
            }
            if (gram[i][j] - gram[j][i]).abs() > 1e-9 {
                return Err(QkmError::Data(format!(
                    "kernel matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// `W(α) = Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ Kᵢⱼ`.
pub fn dual_objective(gram: &[Vec<f64>], labels: &[i8], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * f64::from(labels[i] * labels[j]) * gram[i][j];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Simplified SMO: every KKT violator `i` is paired with a random `j`.
pub fn solve_dual(gram: &[Vec<f64>], labels: &[i8], config: &SmoConfig) -> Result<DualSolution> {
    let n = labels.len();
    if n == 0 {
        return Err(QkmError::InsufficientData("no training points".into()));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(QkmError::Argument("labels must be ±1".into()));
    }
    if config.c.is_nan() || config.c <= 0.0 || config.tolerance.is_nan() || config.tolerance <= 0.0
    {
        return Err(QkmError::Argument(
            "C and tolerance must be positive".into(),
        ));
    }
    check_gram(gram, n)?;

    let c = config.c;
    let tol = config.tolerance;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut alpha = vec![0.0; n];
    // g[k] = Σ_j α_j y_j K_jk
    let mut g = vec![0.0; n];
    let mut b = 0.0;
    let mut rng = rng_from_seed(derive_seed(config.seed, &[domain::SMO]));
    let mut objective = 0.0;
    let mut objective_trace = vec![objective];

    let mut passes = 0;
    let mut sweeps = 0;
    while passes < config.max_passes && sweeps < config.max_sweeps {
        let mut changed = 0;
        for i in 0..n {
            let e_i = g[i] + b - y[i];
            let violates =
                (y[i] * e_i < -tol && alpha[i] < c) || (y[i] * e_i > tol && alpha[i] > 0.0);
            if !violates || n < 2 {
                continue;
            }
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let e_j = g[j] + b - y[j];
            let (ai_old, aj_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if labels[i] != labels[j] {
                ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
            } else {
                ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
            };
            if hi - lo < 1e-12 {
                continue;
            }
            let eta = 2.0 * gram[i][j] - gram[i][i] - gram[j][j];
            if eta >= 0.0 {
                continue;
            }
            let aj = (aj_old - y[j] * (e_i - e_j) / eta).clamp(lo, hi);
            if (aj - aj_old).abs() < MIN_STEP {
                continue;
            }
            // keep both multipliers exactly inside the box despite rounding
            let aj = snap_to_box(aj, c);
            let ai = snap_to_box(ai_old + y[i] * y[j] * (aj_old - aj), c);
            let (di, dj) = (ai - ai_old, aj - aj_old);
            let b1 = b - e_i - y[i] * di * gram[i][i] - y[j] * dj * gram[i][j];
            let b2 = b - e_j - y[i] * di * gram[i][j] - y[j] * dj * gram[j][j];
            b = if ai > 0.0 && ai < c {
                b1
            } else if aj > 0.0 && aj < c {
                b2
            } else {
                0.5 * (b1 + b2)
            };
            alpha[i] = ai;
            alpha[j] = aj;
            for k in 0..n {
                g[k] += y[i] * di * gram[i][k] + y[j] * dj * gram[j][k];
            }
            objective = alpha.iter().sum::<f64>()
                - 0.5 * (0..n).map(|k| alpha[k] * y[k] * g[k]).sum::<f64>();
            objective_trace.push(objective);
            changed += 1;
        }
        sweeps += 1;
        passes = if changed == 0 { passes + 1 } else { 0 };
    }

    let bias = final_bias(&alpha, &y, &g, c);
    let support_indices = (0..n).filter(|&i| alpha[i] > BOUND_EPS).collect();
    Ok(DualSolution {
        alphas: alpha,
        bias,
        support_indices,
        labels: labels.to_vec(),
        regularization_c: c,
        converged: passes >= config.max_passes,
        jitter: 0.0,
        objective_trace,
    })
}

fn snap_to_box(a: f64, c: f64) -> f64 {
    if a < 1e-12 * c {
        0.0
    } else if a > c * (1.0 - 1e-12) {
        c
    } else {
        a
    }
}

/// Mean of `yᵢ − gᵢ` over free support vectors; without any, the midpoint of
/// the interval the bound multipliers allow.
fn final_bias(alpha: &[f64], y: &[f64], g: &[f64], c: f64) -> f64 {
    let free: Vec<f64> = (0..alpha.len())
        .filter(|&i| alpha[i] > BOUND_EPS && alpha[i] < c - BOUND_EPS)
        .map(|i| y[i] - g[i])
        .collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..alpha.len() {
        let at_zero = alpha[i] <= BOUND_EPS;
        // y f ≥ 1 at α = 0, y f ≤ 1 at α = C
        let raises_lower = (y[i] > 0.0) == at_zero;
        let edge = y[i] - g[i];
        if raises_lower {
            lower = lower.max(edge);
        } else {
            upper = upper.min(edge);
        }
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

/// Retries with growing diagonal jitter until the solver converges.
pub fn solve_dual_with_jitter(
    gram: &[Vec<f64>],
    labels: &[i8],
    config: &SmoConfig,
) -> Result<DualSolution> {
    let mut last = None;
    for jitter in JITTER_SCHEDULE {
        let solution = if jitter == 0.0 {
            solve_dual(gram, labels, config)?
        } else {
            log::debug!("retrying SMO with diagonal jitter {jitter:e}");
            let mut padded = gram.to_vec();
            for (i, row) in padded.iter_mut().enumerate() {
                row[i] += jitter;
            }
            let mut s = solve_dual(&padded, labels, config)?;
            s.jitter = jitter;
            s
        };
        if solution.converged {
            return Ok(solution);
        }
        last = Some(solution);
    }
    let last = last.expect("non-empty schedule");
    log::warn!("SMO did not converge even with jitter {:e}", last.jitter);
    Ok(last)
}

pub fn decision_function(model: &DualSolution, kernel_row: &[f64]) -> Result<f64> {
    if kernel_row.len() != model.alphas.len() {
        return Err(QkmError::Shape(format!(
            "kernel row has {} entries for {} training points",
            kernel_row.len(),
            model.alphas.len()
        )));
    }
    Ok(model
        .alphas
        .iter()
        .zip(&model.labels)
        .zip(kernel_row)
        .map(|((a, &y), k)| a * f64::from(y) * k)
        .sum::<f64>()
        + model.bias)
}

/// How kernel values are produced for training and prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(−γ |a − b|²)`.
    Rbf { gamma: f64 },
    /// Feature-map kernel on the first two (angle-scaled) features.
    Quantum { mode: SampleMode, seed: u64 },
    /// Kernel values are supplied by the caller.
    Precomputed,
}

/// `1 / (P · Var)` where the variance runs over every feature value.
pub fn rbf_gamma_scale(points: &[Vec<f64>]) -> f64 {
    let values: Vec<f64> = points.iter().flatten().copied().collect();
    let dim = points.first().map_or(1, Vec::len).max(1);
    if values.is_empty() {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0
    }
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

impl KernelSpec {
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        match *self {
            KernelSpec::Rbf { gamma } => Ok(points
                .iter()
                .map(|a| points.iter().map(|b| rbf_kernel(a, b, gamma)).collect())
                .collect()),
            KernelSpec::Quantum { mode, seed } => Ok(kernel_gram(points, mode, seed)?.matrix),
            KernelSpec::Precomputed => Err(QkmError::Argument(
                "precomputed kernels must be supplied as matrices".into(),
            )),
        }
    }

    /// `rows × train` kernel values.
    pub fn cross(&self, rows: &[Vec<f64>], train: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        match *self {
            KernelSpec::Rbf { gamma } => Ok(rows
                .iter()
                .map(|a| train.iter().map(|b| rbf_kernel(a, b, gamma)).collect())
                .collect()),
            KernelSpec::Quantum { mode, seed } => kernel_cross(rows, train, mode, seed),
            KernelSpec::Precomputed => Err(QkmError::Argument(
                "precomputed kernels must be supplied as matrices".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    pub classes: Vec<usize>,
    pub models: Vec<DualSolution>,
    pub kernel: KernelSpec,
    /// Needed to evaluate kernel rows at prediction time; empty for
    /// precomputed kernels.
    pub training_points: Vec<Vec<f64>>,
}

/// One binary solve per class (`class → +1`, everything else `−1`).
pub fn fit_ovr_gram(
    gram: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    config: &SmoConfig,
) -> Result<Vec<DualSolution>> {
    if num_classes < 2 {
        return Err(QkmError::ClassCount(format!(
            "one-against-rest needs at least 2 classes, got {num_classes}"
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(QkmError::ClassCount(format!(
            "label {bad} outside 0..{num_classes}"
        )));
    }
    for class in 0..num_classes {
        if !labels.contains(&class) {
            return Err(QkmError::ClassCount(format!(
                "class {class} has no training samples"
            )));
        }
    }
    (0..num_classes)
        .into_par_iter()
        .map(|class| {
            let binary: Vec<i8> = labels
                .iter()
                .map(|&l| if l == class { 1 } else { -1 })
                .collect();
            let cfg = SmoConfig {
                seed: derive_seed(config.seed, &[class as u64]),
                ..config.clone()
            };
            solve_dual_with_jitter(gram, &binary, &cfg)
        })
        .collect()
}

pub fn fit_ovr(
    points: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    kernel: KernelSpec,
    config: &SmoConfig,
) -> Result<OvrModel> {
    if points.len() != labels.len() {
        return Err(QkmError::Shape(format!(
            "{} points vs {} labels",
            points.len(),
            labels.len()
        )));
    }
    let gram = kernel.gram(points)?;
    let models = fit_ovr_gram(&gram, labels, num_classes, config)?;
    Ok(OvrModel {
        classes: (0..num_classes).collect(),
        models,
        kernel,
        training_points: points.to_vec(),
    })
}

/// Per-class decision scores for each kernel row (`row[i] = K(xᵢ, x)`).
pub fn ovr_scores(models: &[DualSolution], rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .map(|row| models.iter().map(|m| decision_function(m, row)).collect())
        .collect()
}

/// Highest-scoring class per row; exact ties go to the lower class index.
pub fn predict_ovr_rows(model: &OvrModel, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
    Ok(ovr_scores(&model.models, rows)?
        .into_iter()
        .map(|scores| {
            let mut best = 0;
            for (c, s) in scores.iter().enumerate() {
                if *s > scores[best] {
                    best = c;
                }
            }
            model.classes[best]
        })
        .collect())
}

pub fn predict_ovr(model: &OvrModel, test_points: &[Vec<f64>]) -> Result<Vec<usize>> {
    if test_points.is_empty() {
        return Ok(Vec::new());
    }
    let rows = model.kernel.cross(test_points, &model.training_points)?;
    predict_ovr_rows(model, &rows)
}

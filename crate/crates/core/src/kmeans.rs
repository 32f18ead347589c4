//! Lloyd-style K-means with a pluggable squared-distance backend.
//!
//! Centroid updates and assignment are classical; only the point-to-centroid
//! distance changes between the classical formula and the swap-test circuit.
//! Termination is relaxed: the loop stops once the fraction of points that
//! changed cluster is at most `epsilon`, which keeps shot-noisy runs from
//! oscillating forever near cluster boundaries.

use std::borrow::Cow;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{classical_distance_oracle, quantum_distance, SampleMode};
use crate::encoding::euclidean_norm;
use crate::error::{QkmError, Result};
use crate::seed::{derive_seed, domain, rng_from_seed};

/// Candidates closer than `TIE_TOLERANCE · (|x|² + |c|²)` to the current best
/// count as ties and lose to the lower centroid index. The swap-test estimate
/// carries rounding of that order, so the same rule makes classical and
/// exact-quantum assignments agree.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Added to the first component of a zero vector before amplitude encoding.
pub const ZERO_NORM_NUDGE: f64 = 1e-9;

/// Largest cluster count `cluster_accuracy` will brute-force.
pub const MAX_PERMUTATION_K: usize = 10;

const DEFAULT_SHOT_EPSILON: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    Classical,
    QuantumExact,
    QuantumShots(u64),
}

impl DistanceKind {
    pub fn is_quantum(self) -> bool {
        !matches!(self, DistanceKind::Classical)
    }

    pub fn squared_distance(self, x: &[f64], c: &[f64], rng_seed: u64) -> Result<f64> {
        let mode = match self {
            DistanceKind::Classical => return classical_distance_oracle(x, c),
            DistanceKind::QuantumExact => SampleMode::Exact,
            DistanceKind::QuantumShots(shots) => SampleMode::Shots(shots),
        };
        let x = encodable(x);
        let c = encodable(c);
        Ok(quantum_distance(&x, &c, mode, rng_seed)?.squared_distance)
    }
}

fn encodable(x: &[f64]) -> Cow<'_, [f64]> {
    if euclidean_norm(x) > 0.0 || x.is_empty() {
        return Cow::Borrowed(x);
    }
    log::warn!("zero-norm vector nudged by {ZERO_NORM_NUDGE:e} for amplitude encoding");
    let mut nudged = x.to_vec();
    nudged[0] = ZERO_NORM_NUDGE;
    Cow::Owned(nudged)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    RandomPoints,
    KMeansPlusPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub distance: DistanceKind,
    pub max_iterations: usize,
    /// Reassigned fraction at or below which the loop stops. `None` picks
    /// 0 for exact backends and 0.02 for shot sampling.
    pub epsilon: Option<f64>,
    pub init: InitMethod,
    pub seed: u64,
    /// Independent runs; the one with the lowest final WCSS is kept.
    pub restarts: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, distance: DistanceKind) -> Self {
        Self {
            k,
            distance,
            max_iterations: 100,
            epsilon: None,
            init: InitMethod::RandomPoints,
            seed: 0,
            restarts: 1,
        }
    }

    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(match self.distance {
            DistanceKind::QuantumShots(_) => DEFAULT_SHOT_EPSILON,
            _ => 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(QkmError::Argument("k must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(QkmError::Argument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(QkmError::Argument("restarts must be at least 1".into()));
        }
        let eps = self.effective_epsilon();
        if !(0.0..1.0).contains(&eps) {
            return Err(QkmError::Argument(format!("epsilon {eps} outside [0, 1)")));
        }
        if self.distance == DistanceKind::QuantumShots(0) {
            return Err(QkmError::Argument("shot count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub wcss: f64,
    pub reassigned_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iterations_run: usize,
    pub wcss_trace: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    /// Which restart produced this model.
    pub restart: usize,
}

fn check_data(data: &[Vec<f64>], k: usize) -> Result<usize> {
    if data.len() < k {
        return Err(QkmError::InsufficientData(format!(
            "{} points for {k} clusters",
            data.len()
        )));
    }
    let dim = data.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(QkmError::Shape("points have no features".into()));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != dim {
            return Err(QkmError::Shape(format!(
                "point {i} has {} features, expected {dim}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(QkmError::DegenerateInput(format!(
                "point {i} has a non-finite feature"
            )));
        }
    }
    Ok(dim)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn init_centroids(
    data: &[Vec<f64>],
    k: usize,
    init: InitMethod,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(QkmError::Argument("k must be at least 1".into()));
    }
    check_data(data, k)?;
    let mut rng = rng_from_seed(derive_seed(seed, &[domain::KMEANS_INIT]));
    let chosen: Vec<usize> = match init {
        InitMethod::RandomPoints => index::sample(&mut rng, data.len(), k).into_vec(),
        InitMethod::KMeansPlusPlus => {
            let mut chosen = vec![rng.random_range(0..data.len())];
            let mut nearest: Vec<f64> = data.iter().map(|x| sq_dist(x, &data[chosen[0]])).collect();
            while chosen.len() < k {
                let total: f64 = nearest.iter().sum();
                let next = if total > 0.0 {
                    let target = rng.random::<f64>() * total;
                    let mut acc = 0.0;
                    let mut pick = None;
                    for (i, w) in nearest.iter().enumerate() {
                        acc += w;
                        if *w > 0.0 && acc > target {
                            pick = Some(i);
                            break;
                        }
                    }
                    // rounding can leave `target` just past the last bucket
                    pick.unwrap_or_else(|| nearest.iter().rposition(|w| *w > 0.0).unwrap())
                } else {
                    let free: Vec<usize> =
                        (0..data.len()).filter(|i| !chosen.contains(i)).collect();
                    free[rng.random_range(0..free.len())]
                };
                chosen.push(next);
                for (i, x) in data.iter().enumerate() {
                    nearest[i] = nearest[i].min(sq_dist(x, &data[next]));
                }
            }
            chosen
        }
    };
    Ok(chosen.into_iter().map(|i| data[i].clone()).collect())
}

/// Index of the nearest centroid for every point.
///
/// `rng_seed` and `iteration` only matter for shot sampling: the draw for
/// point `i` and centroid `c` is seeded from `(rng_seed, iteration, i, c)`.
pub fn assign_points(
    data: &[Vec<f64>],
    centroids: &[Vec<f64>],
    distance: DistanceKind,
    rng_seed: u64,
    iteration: usize,
) -> Result<Vec<usize>> {
    if centroids.is_empty() {
        return Err(QkmError::Argument("no centroids".into()));
    }
    data.par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let seed = derive_seed(
                    rng_seed,
                    &[domain::KMEANS_ASSIGN, iteration as u64, i as u64, c as u64],
                );
                let d = distance.squared_distance(x, centroid, seed).map_err(|e| {
                    QkmError::DegenerateInput(format!("point {i} vs centroid {c}: {e}"))
                })?;
                let scale = x.iter().chain(centroid).map(|v| v * v).sum::<f64>();
                if d < best_d - TIE_TOLERANCE * scale {
                    best = c;
                    best_d = d;
                }
            }
            Ok(best)
        })
        .collect()
}

/// Componentwise member means. An empty cluster takes the point lying
/// farthest from the centroid it was assigned to in `previous`.
pub fn update_centroids(
    data: &[Vec<f64>],
    assignments: &[usize],
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let k = previous.len();
    let dim = previous.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in data.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x) {
            *s += v;
        }
    }
    let mut taken = Vec::new();
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums[c].iter_mut().for_each(|s| *s /= n);
            continue;
        }
        let far = data
            .iter()
            .zip(assignments)
            .enumerate()
            .filter(|(i, _)| !taken.contains(i))
            .map(|(i, (x, &a))| (i, sq_dist(x, &previous[a])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        match far {
            Some((i, _)) => {
                log::debug!("cluster {c} empty, re-seeded at point {i}");
                taken.push(i);
                sums[c] = data[i].clone();
            }
            None => sums[c] = previous[c].clone(),
        }
    }
    sums
}

/// Within-cluster sum of squared distances.
pub fn wcss(data: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.iter()
        .zip(assignments)
        .map(|(x, &a)| sq_dist(x, &centroids[a]))
        .sum()
}

pub fn fit(data: &[Vec<f64>], config: &KMeansConfig) -> Result<ClusterModel> {
    config.validate()?;
    check_data(data, config.k)?;
    let mut best: Option<ClusterModel> = None;
    for restart in 0..config.restarts {
        let seed = if restart == 0 {
            config.seed
        } else {
            derive_seed(config.seed, &[domain::KMEANS_RESTART, restart as u64])
        };
        let mut model = fit_once(data, config, seed)?;
        model.restart = restart;
        let better = match &best {
            None => true,
            Some(b) => model.wcss_trace.last() < b.wcss_trace.last(),
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn fit_once(data: &[Vec<f64>], config: &KMeansConfig, seed: u64) -> Result<ClusterModel> {
    let epsilon = config.effective_epsilon();
    let mut centroids = init_centroids(data, config.k, config.init, seed)?;
    let mut previous: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 0..config.max_iterations {
        let assignments = assign_points(data, &centroids, config.distance, seed, iteration)?;
        let reassigned_fraction = match &previous {
            Some(prev) => {
                prev.iter()
                    .zip(&assignments)
                    .filter(|(a, b)| a != b)
                    .count() as f64
                    / data.len() as f64
            }
            None => 1.0,
        };
        centroids = update_centroids(data, &assignments, &centroids);
        trace.push(IterationRecord {
            iteration,
            wcss: wcss(data, &assignments, &centroids),
            reassigned_fraction,
        });
        let settled = previous.is_some() && reassigned_fraction <= epsilon;
        previous = Some(assignments);
        if settled {
            converged = true;
            break;
        }
    }

    Ok(ClusterModel {
        k: config.k,
        centroids,
        assignments: previous.expect("max_iterations ≥ 1"),
        iterations_run: trace.len(),
        wcss_trace: trace.iter().map(|r| r.wcss).collect(),
        trace,
        converged,
        restart: 0,
    })
}

/// Fraction of points whose cluster matches their label under the best
/// one-to-one relabeling of clusters, found by exhaustive search.
pub fn cluster_accuracy(assignments: &[usize], labels: &[usize]) -> Result<f64> {
    let map = best_relabeling(assignments, labels)?;
    let hits = assignments
        .iter()
        .zip(labels)
        .filter(|(&a, &l)| map[a] == l)
        .count();
    Ok(hits as f64 / assignments.len() as f64)
}

/// The cluster → label map maximising agreement; among equally good maps
/// the first in lexicographic order wins.
pub fn best_relabeling(assignments: &[usize], labels: &[usize]) -> Result<Vec<usize>> {
    if assignments.len() != labels.len() {
        return Err(QkmError::Shape(format!(
            "{} assignments vs {} labels",
            assignments.len(),
            labels.len()
        )));
    }
    if assignments.is_empty() {
        return Err(QkmError::Argument("no points to score".into()));
    }
    let k = assignments.iter().chain(labels).max().map_or(0, |m| m + 1);
    if k > MAX_PERMUTATION_K {
        return Err(QkmError::Capacity(format!(
            "{k} clusters exceeds the exhaustive matching bound of {MAX_PERMUTATION_K}"
        )));
    }
    let mut table = vec![vec![0usize; k]; k];
    for (&a, &l) in assignments.iter().zip(labels) {
        table[a][l] += 1;
    }
    let mut best = (0, (0..k).collect());
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; k];
    search(&table, &mut current, &mut used, &mut best);
    Ok(best.1)
}

fn search(
    table: &[Vec<usize>],
    current: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut (usize, Vec<usize>),
) {
    let depth = current.len();
    if depth == table.len() {
        let score = current.iter().enumerate().map(|(c, &l)| table[c][l]).sum();
        if score > best.0 {
            *best = (score, current.clone());
        }
        return;
    }
    for l in 0..table.len() {
        if !used[l] {
            used[l] = true;
            current.push(l);
            search(table, current, used, best);
            current.pop();
            used[l] = false;
        }
    }
}

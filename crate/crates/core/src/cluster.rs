//! Spherical k-means with spkm++ seeding.
//!
//! Points are unit-normalized once on load. Each iteration assigns every point
//! to the centroid of highest cosine similarity (ties go to the lowest cluster
//! id) and then moves each centroid to the normalized mean of its members.
//! Iteration stops when an assignment pass changes nothing or `max_iter`
//! passes have run.
//!
//! Work is spread over the current rayon pool, but every reduction runs in a
//! fixed order so results are bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::store::Corpus;

/// Sampling weights at or below this are treated as zero (duplicate directions).
const DUPLICATE_TOLERANCE: f64 = 4.0 * f64::EPSILON;

/// Row-major matrix of unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVectors {
    dim: usize,
    data: Vec<f64>,
}

impl UnitVectors {
    /// Normalize each row; zero rows are rejected.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if dim == 0 || !rows.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rows.len(),
            });
        }
        let mut data = rows.to_vec();
        for (i, row) in data.chunks_exact_mut(dim).enumerate() {
            if !normalize(row) {
                return Err(Error::Input(format!("point {i} is a zero vector")));
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let rows: Vec<f64> = corpus.vectors().iter().map(|&v| v as f64).collect();
        Self::from_rows(corpus.dim(), &rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Scale `v` to unit length in place. Returns false for a zero (or non-finite) vector.
pub fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index and similarity of the most similar centroid; ties keep the lowest index.
fn nearest(x: &[f64], centroids: &[f64], dim: usize) -> (u32, f64) {
    let mut best = 0u32;
    let mut best_sim = f64::NEG_INFINITY;
    for (k, c) in centroids.chunks_exact(dim).enumerate() {
        let s = dot(x, c);
        if s > best_sim {
            best_sim = s;
            best = k as u32;
        }
    }
    (best, best_sim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Candidates drawn per seeding step; 1 gives plain spkm++.
    pub local_trials: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iter: 1000,
            seed,
            local_trials: default_local_trials(k),
        }
    }
}

/// `2 + floor(ln k)` candidates per seeding step.
pub fn default_local_trials(k: usize) -> usize {
    2 + (k.max(1) as f64).ln().floor() as usize
}

/// Fitted clustering: unit centroids plus one hard assignment per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub dim: usize,
    /// `k x dim`, row-major.
    pub centroids: Vec<f64>,
    pub assignments: Vec<u32>,
    /// Σ cos(x, centroid[assignment(x)]).
    pub objective: f64,
    /// Objective after each update step.
    pub objective_trace: Vec<f64>,
    pub iterations_run: u32,
    pub converged: bool,
    pub seed: u64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroid(&self, k: usize) -> &[f64] {
        &self.centroids[k * self.dim..(k + 1) * self.dim]
    }

    /// Cluster id for an arbitrary non-zero vector.
    pub fn assign(&self, vector: &[f64]) -> Result<u32> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        let mut x = vector.to_vec();
        if !normalize(&mut x) {
            return Err(Error::Input("cannot assign a zero vector".into()));
        }
        Ok(nearest(&x, &self.centroids, self.dim).0)
    }

    /// Recompute the objective from centroids and assignments.
    pub fn recompute_objective(&self, points: &UnitVectors) -> f64 {
        objective(points, &self.centroids, &self.assignments)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a as usize] += 1;
        }
        sizes
    }
}

/// Free-function form of [`ClusterModel::assign`].
pub fn assign(model: &ClusterModel, vector: &[f64]) -> Result<u32> {
    model.assign(vector)
}

fn objective(points: &UnitVectors, centroids: &[f64], assignments: &[u32]) -> f64 {
    let dim = points.dim();
    let sims: Vec<f64> = assignments
        .par_iter()
        .enumerate()
        .map(|(i, &a)| dot(points.row(i), &centroids[a as usize * dim..(a as usize + 1) * dim]))
        .collect();
    sims.iter().sum()
}

/// spkm++ seeding: the first centroid is a uniformly chosen point, each later
/// one is drawn with probability proportional to `1 - cos` to the closest
/// centroid chosen so far. With `trials > 1`, that many candidates are drawn
/// per step and the one leaving the smallest total weight is kept (ties go
/// to the earliest draw). Returns `k x dim` centroids, each a data point.
pub fn spkmpp_init(points: &UnitVectors, k: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spkmpp_init_with(points, k, trials, &mut rng)
}

fn seeding_weight(point: &[f64], centroid: &[f64]) -> f64 {
    let d = 1.0 - dot(point, centroid);
    if d <= DUPLICATE_TOLERANCE {
        0.0
    } else {
        d
    }
}

fn draw_weighted<R: Rng>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            pick = Some(i);
            acc += w;
            if acc > target {
                break;
            }
        }
    }
    // `pick` is the last positive weight if rounding left `acc <= target`.
    pick.expect("positive total implies a positive weight")
}

pub fn spkmpp_init_with<R: Rng>(points: &UnitVectors, k: usize, trials: usize, rng: &mut R) -> Result<Vec<f64>> {
    let n = points.len();
    let dim = points.dim();
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::Config("seeding needs at least one trial per step".into()));
    }
    if n < k {
        return Err(Error::InsufficientData(format!(
            "{n} points cannot seed {k} clusters"
        )));
    }
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(points.row(first));
    let mut weights: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| seeding_weight(points.row(i), points.row(first)))
        .collect();

    for chosen in 1..k {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InsufficientData(format!(
                "only {chosen} distinct directions available for {k} clusters"
            )));
        }
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = draw_weighted(&weights, total, rng);
            let updated: Vec<f64> = weights
                .par_iter()
                .enumerate()
                .map(|(i, &w)| w.min(seeding_weight(points.row(i), points.row(cand))))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.1) {
                best = Some((cand, potential, updated));
            }
        }
        let (pick, _, updated) = best.expect("at least one trial");
        weights = updated;
        centroids.extend_from_slice(points.row(pick));
    }
    Ok(centroids)
}

/// Seed with spkm++ and run spherical k-means.
pub fn fit(points: &UnitVectors, cfg: &KMeansConfig) -> Result<ClusterModel> {
    let init = spkmpp_init(points, cfg.k, cfg.local_trials, cfg.seed)?;
    fit_from(points, init, cfg.max_iter, cfg.seed)
}

/// Run spherical k-means from the given initial centroids (`k x dim`).
pub fn fit_from(
    points: &UnitVectors,
    mut centroids: Vec<f64>,
    max_iter: usize,
    seed: u64,
) -> Result<ClusterModel> {
    let n = points.len();
    let dim = points.dim();
    if centroids.is_empty() || !centroids.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: centroids.len(),
        });
    }
    let k = centroids.len() / dim;
    if n < k {
        return Err(Error::InsufficientData(format!(
            "{n} points for {k} clusters"
        )));
    }
    for c in centroids.chunks_exact_mut(dim) {
        if !normalize(c) {
            return Err(Error::Input("initial centroid is a zero vector".into()));
        }
    }

    let mut assignments = vec![u32::MAX; n];
    let mut trace = Vec::new();
    let mut iterations_run = 0u32;
    let mut converged = false;

    for _ in 0..max_iter {
        let fresh: Vec<u32> = (0..n)
            .into_par_iter()
            .map(|i| nearest(points.row(i), &centroids, dim).0)
            .collect();
        let changes = fresh
            .iter()
            .zip(&assignments)
            .filter(|(a, b)| a != b)
            .count();
        assignments = fresh;
        iterations_run += 1;
        if changes == 0 {
            converged = true;
            break;
        }
        update_centroids(points, &assignments, &mut centroids, k);
        repair_empty_clusters(points, &mut assignments, &mut centroids, k);
        trace.push(objective(points, &centroids, &assignments));
    }

    let objective = match trace.last() {
        Some(&v) => v,
        None => objective(points, &centroids, &assignments),
    };
    Ok(ClusterModel {
        dim,
        centroids,
        assignments,
        objective,
        objective_trace: trace,
        iterations_run,
        converged,
        seed,
    })
}

fn members_by_cluster(assignments: &[u32], k: usize) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a as usize].push(i);
    }
    members
}

/// Normalized member sum, or `None` for an empty cluster or a sum that cancels to zero.
fn mean_direction(points: &UnitVectors, members: &[usize]) -> Option<Vec<f64>> {
    if members.is_empty() {
        return None;
    }
    let mut sum = vec![0.0; points.dim()];
    for &i in members {
        for (s, x) in sum.iter_mut().zip(points.row(i)) {
            *s += x;
        }
    }
    normalize(&mut sum).then_some(sum)
}

fn update_centroids(points: &UnitVectors, assignments: &[u32], centroids: &mut [f64], k: usize) {
    let dim = points.dim();
    let members = members_by_cluster(assignments, k);
    let updated: Vec<Option<Vec<f64>>> = members
        .par_iter()
        .map(|m| mean_direction(points, m))
        .collect();
    for (c, new) in centroids.chunks_exact_mut(dim).zip(updated) {
        // A cancelling sum leaves every direction equally good; keep the old one.
        if let Some(new) = new {
            c.copy_from_slice(&new);
        }
    }
}

/// Reseed each empty cluster with the point least similar to its own centroid,
/// taken from a cluster that keeps at least one member.
fn repair_empty_clusters(
    points: &UnitVectors,
    assignments: &mut [u32],
    centroids: &mut [f64],
    k: usize,
) {
    let dim = points.dim();
    loop {
        let members = members_by_cluster(assignments, k);
        let Some(empty) = members.iter().position(|m| m.is_empty()) else {
            return;
        };
        let sims: Vec<f64> = (0..assignments.len())
            .into_par_iter()
            .map(|i| {
                let a = assignments[i] as usize;
                dot(points.row(i), &centroids[a * dim..(a + 1) * dim])
            })
            .collect();
        let donor_point = (0..assignments.len())
            .filter(|&i| members[assignments[i] as usize].len() >= 2)
            .min_by(|&a, &b| sims[a].total_cmp(&sims[b]).then(a.cmp(&b)));
        let Some(p) = donor_point else {
            return;
        };
        let donor = assignments[p] as usize;
        assignments[p] = empty as u32;
        centroids[empty * dim..(empty + 1) * dim].copy_from_slice(points.row(p));
        let remaining: Vec<usize> = members[donor].iter().copied().filter(|&i| i != p).collect();
        if let Some(c) = mean_direction(points, &remaining) {
            centroids[donor * dim..(donor + 1) * dim].copy_from_slice(&c);
        }
    }
}

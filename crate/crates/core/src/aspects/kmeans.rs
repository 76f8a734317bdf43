//! Lloyd's k-means with seeded farthest-point initialization.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::embedding::KeywordEmbedding;
use super::AspectError;

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansFit {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after every assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_count<'a>(points: impl IntoIterator<Item = &'a Vec<f64>>) -> usize {
    points
        .into_iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        .collect::<HashSet<_>>()
        .len()
}

/// The first center is a seeded uniform pick; every further center is the
/// point farthest from the centers chosen so far (ties: lowest index).
fn farthest_point_seeds(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..points.len());
    let mut centers = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &points[first]))
        .collect();
    while centers.len() < k {
        let next = (0..points.len()).fold(0, |best, i| {
            if nearest[i] > nearest[best] {
                i
            } else {
                best
            }
        });
        centers.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(squared_distance(p, &points[next]));
        }
    }
    centers
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut objective = 0.0;
    let assignment = points
        .iter()
        .map(|p| {
            let (best, dist) = centroids
                .iter()
                .map(|c| squared_distance(p, c))
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (j, d)| if d < acc.1 { (j, d) } else { acc });
            objective += dist;
            best
        })
        .collect();
    (assignment, objective)
}

pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit, AspectError> {
    if k == 0 {
        return Err(AspectError::ZeroClusters);
    }
    let found = distinct_count(points);
    if found < k {
        return Err(AspectError::TooFewPoints { k, found });
    }
    let dim = points[0].len();
    let mut centroids = farthest_point_seeds(points, k, seed);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let assignment = loop {
        let (assignment, objective) = assign(points, &centroids);
        trace.push(objective);
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            sizes[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            // an emptied cluster keeps its previous centroid
            if sizes[c] == 0 {
                continue;
            }
            let mean: Vec<f64> = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            shift = shift.max(squared_distance(&mean, &centroids[c]).sqrt());
            centroids[c] = mean;
        }
        if shift < TOLERANCE || iterations >= MAX_ITERATIONS {
            break assignment;
        }
    };
    Ok(KMeansFit {
        assignment,
        centroids,
        objective_trace: trace,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeywordClusters {
    pub clusters: BTreeMap<String, usize>,
    pub fit: KMeansFit,
}

impl KeywordClusters {
    pub fn members(&self, cluster: usize) -> Vec<&str> {
        self.clusters
            .iter()
            .filter(|(_, &c)| c == cluster)
            .map(|(t, _)| t.as_str())
            .collect()
    }
}

/// Groups every keyword (isolated ones included) into `k` clusters.
pub fn cluster_keywords(
    embedding: &KeywordEmbedding,
    k: usize,
    seed: u64,
) -> Result<KeywordClusters, AspectError> {
    let nonzero = distinct_count(
        embedding
            .vectors
            .iter()
            .filter(|v| v.iter().any(|&x| x != 0.0)),
    );
    if nonzero < k {
        return Err(AspectError::TooFewPoints { k, found: nonzero });
    }
    let fit = kmeans(&embedding.vectors, k, seed)?;
    let clusters = embedding
        .tokens
        .iter()
        .cloned()
        .zip(fit.assignment.iter().copied())
        .collect();
    Ok(KeywordClusters { clusters, fit })
}

//! Seeded k-means with k-means++ seeding and restarts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::sampling::{self, STREAM_KMEANS};
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<T> {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    pub inertia: T,
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn nearest<T: Scalar>(p: &[T], centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, sq_dist(p, &centroids[0]));
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centroids<T: Scalar>(points: &[Vec<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &centroids[0]).to_f64_lossy())
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = d2.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[pick]).to_f64_lossy());
        }
    }
    centroids
}

fn lloyd<T: Scalar>(points: &[Vec<T>], mut centroids: Vec<Vec<T>>) -> Clustering<T> {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![T::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, &x) in sums[a].iter_mut().zip(p) {
                *s = *s + x;
            }
        }
        for c in 0..k {
            // An emptied cluster keeps its previous centroid.
            if counts[c] > 0 {
                let n = T::from_usize(counts[c]).expect("count fits scalar");
                centroids[c] = sums[c].iter().map(|&s| s / n).collect();
            }
        }
    }
    let inertia = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum();
    Clustering {
        assignments,
        centroids,
        inertia,
    }
}

/// Runs `restarts` seeded k-means++ initializations followed by Lloyd
/// iterations and keeps the lowest-inertia run (earliest on ties).
pub fn kmeans<T: Scalar>(points: &[Vec<T>], k: usize, restarts: usize, seed: u64) -> Clustering<T> {
    assert!(k >= 1 && k <= points.len(), "k must be in 1..=points");
    let mut best: Option<Clustering<T>> = None;
    for r in 0..restarts.max(1) {
        let mut rng = sampling::rng_for(seed, &[STREAM_KMEANS, r as u64]);
        let run = lloyd(points, seed_centroids(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

/// Fraction of items whose cluster's majority label equals their own.
pub fn purity(assignments: &[usize], labels: &[usize]) -> f64 {
    use std::collections::HashMap;
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for (&a, &l) in assignments.iter().zip(labels) {
        *counts.entry((a, l)).or_insert(0) += 1;
    }
    let mut best: HashMap<usize, usize> = HashMap::new();
    for (&(a, _), &n) in &counts {
        let e = best.entry(a).or_insert(0);
        *e = (*e).max(n);
    }
    best.values().sum::<usize>() as f64 / assignments.len() as f64
}

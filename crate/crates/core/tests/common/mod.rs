#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `n` Gaussian columns of length `d`, half of the time shifted by a shared
/// offset so that both well spread and clustered spectra occur.
pub fn random_columns(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Vec<Vec<f64>> {
    let offset = if rng.random_bool(0.5) {
        gaussian_vec(rng, d).into_iter().map(|x| 2.0 * x).collect()
    } else {
        vec![0.0; d]
    };
    (0..n)
        .map(|_| {
            gaussian_vec(rng, d)
                .into_iter()
                .zip(&offset)
                .map(|(x, o)| x + o)
                .collect()
        })
        .collect()
}

pub fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (nu * nv)).abs().min(1.0).acos()
}

/// `n` points in the plane around `k` centers spread evenly on a circle of
/// radius 4, with Gaussian noise. Labels are the generating center, except
/// that each label is replaced by a random one with probability `flip`.
pub fn blobs(rng: &mut ChaCha8Rng, n: usize, k: usize, noise: f64, flip: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    let centers: Vec<[f64; 2]> = (0..k)
        .map(|c| {
            let a = phase + std::f64::consts::TAU * c as f64 / k as f64;
            [4.0 * a.cos(), 4.0 * a.sin()]
        })
        .collect();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = if i < k { i } else { rng.random_range(0..k) };
        points.push(
            centers[c]
                .iter()
                .map(|&x| x + noise * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        labels.push(if rng.random_bool(flip) {
            rng.random_range(0..k)
        } else {
            c
        });
    }
    (points, labels)
}

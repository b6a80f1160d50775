//! Brute-force reference computations.
//!
//! These deliberately share no code with the main paths: explicit Gram
//! matrices with cyclic Jacobi rotations instead of the Householder/QL
//! solver, full double loops instead of the summed-unit-vector identity,
//! counting ranks instead of sorting, and exhaustive enumeration instead of
//! k-means. They are meant for small inputs in tests and for deriving
//! expected values.

#![allow(clippy::needless_range_loop)]

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Maximum explainable variance from the eigenvalues of `MᵀM`, where the
/// columns of `M` are `columns`.
pub fn oracle_mev(columns: &[Vec<f64>]) -> f64 {
    let n = columns.len();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
    }
    let eig = jacobi_eigenvalues(&gram);
    let total: f64 = (0..n).map(|i| gram[i][i]).sum();
    eig[0] / total
}

/// Mean cosine over all ordered pairs `j != k` of columns.
pub fn oracle_pairwise_mean_cos(columns: &[Vec<f64>]) -> f64 {
    let n = columns.len();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let dot: f64 = columns[j].iter().zip(&columns[k]).map(|(a, b)| a * b).sum();
            let nj: f64 = columns[j].iter().map(|a| a * a).sum::<f64>().sqrt();
            let nk: f64 = columns[k].iter().map(|a| a * a).sum::<f64>().sqrt();
            total += dot / (nj * nk);
        }
    }
    total / (n * n - n) as f64
}

/// Average rank by counting: `1 + #below + (#equal - 1) / 2`.
pub fn counting_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let below = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = counting_ranks(xs);
    let ry = counting_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn partition_inertia(points: &[Vec<f64>], assignment: &[usize], k: usize) -> Option<f64> {
    let d = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(assignment)
            .filter(|(_, &a)| a == c)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            return None;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|i| members.iter().map(|p| p[i]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|p| p.iter().zip(&centroid).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .sum::<f64>();
    }
    Some(total)
}

/// Minimum-inertia partition of `points` into exactly `k` nonempty clusters,
/// by enumerating all `k^N` labelings. Intended for `N <= 8`.
pub fn oracle_min_inertia_partition(points: &[Vec<f64>], k: usize) -> (Vec<usize>, f64) {
    let n = points.len();
    assert!(n <= 10 && k >= 1 && k <= n, "exhaustive search is for tiny inputs");
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut assignment = vec![0usize; n];
    loop {
        if let Some(inertia) = partition_inertia(points, &assignment, k) {
            if best.as_ref().is_none_or(|(_, b)| inertia < *b - 1e-12) {
                best = Some((assignment.clone(), inertia));
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best.expect("some partition has all clusters nonempty");
            }
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

pub fn oracle_purity(assignment: &[usize], labels: &[usize]) -> f64 {
    let clusters = assignment.iter().max().map_or(0, |m| m + 1);
    let categories = labels.iter().max().map_or(0, |m| m + 1);
    let mut majority = 0;
    for c in 0..clusters {
        majority += (0..categories)
            .map(|l| {
                assignment
                    .iter()
                    .zip(labels)
                    .filter(|(&a, &b)| a == c && b == l)
                    .count()
            })
            .max()
            .unwrap_or(0);
    }
    majority as f64 / assignment.len() as f64
}

fn captured(columns: &[Vec<f64>], u: &[f64]) -> f64 {
    columns
        .iter()
        .map(|c| c.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().powi(2))
        .sum()
}

fn sphere_point(d: usize, angles: &[f64]) -> Vec<f64> {
    match d {
        2 => vec![angles[0].cos(), angles[0].sin()],
        3 => {
            let (theta, phi) = (angles[0], angles[1]);
            vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
        }
        _ => unreachable!(),
    }
}

/// Unit vector maximizing `Σ_j (u·c_j)²`, found by an exhaustive grid over
/// the circle (`d = 2`) or sphere (`d = 3`) followed by successively finer
/// local grids. The sign is arbitrary.
pub fn oracle_grid_max_direction(columns: &[Vec<f64>]) -> Vec<f64> {
    use std::f64::consts::PI;
    let d = columns[0].len();
    assert!(d == 2 || d == 3, "grid oracle supports d = 2 or 3");
    let dims = d - 1;
    let coarse = if d == 2 { 3600 } else { 180 };
    let mut best = (f64::NEG_INFINITY, vec![0.0; dims]);
    if d == 2 {
        for i in 0..coarse {
            let a = [PI * i as f64 / coarse as f64];
            let f = captured(columns, &sphere_point(2, &a));
            if f > best.0 {
                best = (f, a.to_vec());
            }
        }
    } else {
        for i in 0..=coarse {
            for j in 0..2 * coarse {
                let a = [PI * i as f64 / coarse as f64, PI * j as f64 / coarse as f64];
                let f = captured(columns, &sphere_point(3, &a));
                if f > best.0 {
                    best = (f, a.to_vec());
                }
            }
        }
    }
    let mut step = PI / coarse as f64;
    let steps = 10i32;
    while step > 1e-9 {
        let center = best.1.clone();
        let offsets: Vec<f64> = (-steps..=steps).map(|s| s as f64 * step / steps as f64).collect();
        if dims == 1 {
            for &o in &offsets {
                let a = [center[0] + o];
                let f = captured(columns, &sphere_point(2, &a));
                if f > best.0 {
                    best = (f, a.to_vec());
                }
            }
        } else {
            for &o1 in &offsets {
                for &o2 in &offsets {
                    let a = [center[0] + o1, center[1] + o2];
                    let f = captured(columns, &sphere_point(3, &a));
                    if f > best.0 {
                        best = (f, a.to_vec());
                    }
                }
            }
        }
        step /= 4.0;
    }
    sphere_point(d, &best.1)
}

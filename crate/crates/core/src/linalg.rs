//! Dense symmetric eigensolver and the singular-value routines built on it.
//!
//! Singular values of a `d x n` matrix are taken from the Gram matrix of its
//! shorter side (`MᵀM` when `n <= d`, `MMᵀ` otherwise), reduced to
//! tridiagonal form with Householder reflections and diagonalized with the
//! implicit QL algorithm. The leading singular value, which is all the
//! variance ratio and the first principal component depend on, is well
//! conditioned under this route.

#![allow(clippy::needless_range_loop)]

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues in descending order, with eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<Array2<T>>,
}

/// Eigen-decomposition of a symmetric matrix. Only the lower triangle is read.
pub fn symmetric_eigen<T: Scalar>(a: ArrayView2<'_, T>, want_vectors: bool) -> Result<SymmetricEigen<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| Array2::zeros((0, 0))),
        });
    }

    let mut v: Vec<T> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(if j <= i { a[[i, j]] } else { a[[j, i]] });
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, n, &mut d, &mut e, want_vectors);
    diagonalize(&mut v, n, &mut d, &mut e, want_vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].partial_cmp(&d[x]).expect("finite eigenvalues"));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = Array2::zeros((n, n));
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                out[[i, dst]] = v[src * n + i];
            }
        }
        out
    });
    Ok(SymmetricEigen { values, vectors })
}

/// Householder reduction to tridiagonal form (EISPACK `tred2` lineage).
/// On return `d` holds the diagonal and `e[1..]` the sub-diagonal. When
/// `accumulate` is set, `v` holds the orthogonal transformation.
fn tridiagonalize<T: Scalar>(v: &mut [T], n: usize, d: &mut [T], e: &mut [T], accumulate: bool) {
    let zero = T::zero();
    // Column-major: inner loops over the first index stay contiguous.
    let at = |i: usize, j: usize| j * n + i;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = zero;
                v[at(j, i)] = zero;
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g = g + v[at(k, j)] * d[k];
                    e[k] = e[k] + v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] = v[at(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = zero;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for i in 0..n {
            d[i] = v[at(i, i)];
        }
        e[0] = zero;
        return;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g = g + v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] = v[at(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = zero;
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = zero;
}

/// Implicit QL iteration on a symmetric tridiagonal matrix (EISPACK `tql2`
/// lineage). Eigenvalues are left in `d`, unsorted.
fn diagonalize<T: Scalar>(v: &mut [T], n: usize, d: &mut [T], e: &mut [T], rotate: bool) -> Result<()> {
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let max_iter = 60 * n.max(1);

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;

    let mut f = zero;
    let mut tst1 = zero;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::Contract("symmetric eigensolver did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if rotate {
                        for k in 0..n {
                            let vk1 = v[(i + 1) * n + k];
                            let vk = v[i * n + k];
                            v[(i + 1) * n + k] = s * vk + c * vk1;
                            v[i * n + k] = c * vk - s * vk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = zero;
    }
    Ok(())
}

fn short_side_gram<T: Scalar>(m: ArrayView2<'_, T>) -> Array2<T> {
    if m.ncols() <= m.nrows() {
        m.t().dot(&m)
    } else {
        m.dot(&m.t())
    }
}

/// Singular values of `m`, descending; there are `min(d, n)` of them.
pub fn singular_values<T: Scalar>(m: ArrayView2<'_, T>) -> Result<Vec<T>> {
    let gram = short_side_gram(m);
    let eig = symmetric_eigen(gram.view(), false)?;
    Ok(eig.values.into_iter().map(|l| l.max(T::zero()).sqrt()).collect())
}

/// Leading singular triple of a matrix.
#[derive(Debug, Clone)]
pub struct LeadingSingular<T> {
    /// All singular values, descending.
    pub singular_values: Vec<T>,
    /// Unit left singular vector for the largest singular value (length `d`).
    pub left: Array1<T>,
}

/// Largest singular value and its left singular vector. The sign of the
/// vector is whatever the eigensolver produced; callers fix conventions.
pub fn leading_singular<T: Scalar>(m: ArrayView2<'_, T>) -> Result<LeadingSingular<T>> {
    let (d, n) = m.dim();
    if d == 0 || n == 0 {
        return Err(Error::DegenerateMatrix);
    }
    let gram = short_side_gram(m);
    let eig = symmetric_eigen(gram.view(), true)?;
    let vectors = eig.vectors.expect("requested eigenvectors");
    let singular_values: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    let sigma1 = singular_values[0];
    if sigma1 == T::zero() {
        return Err(Error::DegenerateMatrix);
    }
    let top = vectors.index_axis(Axis(1), 0);
    let mut left = if n <= d {
        // M v = sigma u
        m.dot(&top) / sigma1
    } else {
        top.to_owned()
    };
    let norm = left.dot(&left).sqrt();
    left.mapv_inplace(|x| x / norm);
    Ok(LeadingSingular { singular_values, left })
}

/// Share of squared singular-value mass carried by the first singular value.
pub fn explained_variance_ratio<T: Scalar>(singular_values: &[T]) -> Result<T> {
    let total: T = singular_values.iter().map(|&s| s * s).sum();
    match singular_values.first() {
        Some(&s1) if total > T::zero() => Ok(s1 * s1 / total),
        _ => Err(Error::DegenerateMatrix),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn two_by_two_eigenvalues() {
        let a = array![[5.0, 2.0], [2.0, 2.0]];
        let eig = symmetric_eigen(a.view(), true).unwrap();
        assert_relative_eq!(eig.values[0], 6.0, epsilon = 1e-12);
        assert_relative_eq!(eig.values[1], 1.0, epsilon = 1e-12);
        let v = eig.vectors.unwrap();
        let ratio = v[[0, 0]] / v[[1, 0]];
        assert_relative_eq!(ratio, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let a = array![
            [4.0, 1.0, -2.0, 0.5],
            [1.0, 3.0, 0.0, 1.5],
            [-2.0, 0.0, 6.0, -1.0],
            [0.5, 1.5, -1.0, 2.0]
        ];
        let eig = symmetric_eigen(a.view(), true).unwrap();
        let v = eig.vectors.unwrap();
        let lambda = Array2::from_diag(&Array1::from(eig.values.clone()));
        let back = v.dot(&lambda).dot(&v.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
        let values_only = symmetric_eigen(a.view(), false).unwrap().values;
        for (x, y) in values_only.iter().zip(&eig.values) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_and_trivial_inputs() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(symmetric_eigen(a.view(), false).unwrap().values, vec![3.0, 2.0, 1.0]);
        let one = array![[7.0f32]];
        assert_eq!(symmetric_eigen(one.view(), true).unwrap().values, vec![7.0]);
    }

    #[test]
    fn singular_values_of_wide_and_tall() {
        // columns (2,0), (0,1), (1,1): M Mᵀ = [[5,1],[1,2]], λ = (7 ± √13) / 2
        let m = array![[2.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        let s = singular_values(m.view()).unwrap();
        let r13 = 13f64.sqrt();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s[0] * s[0], (7.0 + r13) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(s[1] * s[1], (7.0 - r13) / 2.0, epsilon = 1e-12);
        let s_t = singular_values(m.t()).unwrap();
        assert_relative_eq!(s_t[0], s[0], epsilon = 1e-12);
    }

    #[test]
    fn integer_spectrum() {
        let a = array![[5.0f64, 2.0], [2.0, 2.0]];
        let e = symmetric_eigen(a.view(), false).unwrap();
        assert_relative_eq!(e.values[0], 6.0, epsilon = 1e-12);
        assert_relative_eq!(e.values[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn leading_vector_tall_orientation() {
        // n <= d path: 3 x 2 matrix
        let m: Array2<f64> = array![[3.0, 3.0], [0.0, 0.0], [4.0, 4.0]];
        let lead = leading_singular(m.view()).unwrap();
        let u = lead.left;
        assert_relative_eq!(u[0].abs(), 0.6, epsilon = 1e-12);
        assert_relative_eq!(u[2].abs(), 0.8, epsilon = 1e-12);
        assert_relative_eq!(lead.singular_values[1], 0.0, epsilon = 1e-7);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let m = Array2::<f64>::zeros((3, 2));
        assert!(matches!(leading_singular(m.view()), Err(Error::DegenerateMatrix)));
        assert!(matches!(
            explained_variance_ratio(&[0.0, 0.0]),
            Err(Error::DegenerateMatrix)
        ));
    }

    #[test]
    fn non_finite_is_rejected() {
        let a = array![[1.0, f64::NAN], [f64::NAN, 1.0]];
        assert!(symmetric_eigen(a.view(), false).is_err());
    }
}

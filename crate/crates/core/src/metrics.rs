//! Contextuality measures and their anisotropy baselines.
//!
//! Maximum explainable variance uses the singular values of the raw,
//! uncentered occurrence matrix. The MEV baseline follows the same
//! convention, so the shared-mean component common to a layer is removed by
//! the adjustment rather than by centering.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::{self, STREAM_COSINE_BASELINE, STREAM_MEV_BASELINE};
use crate::scalar::{self, Scalar};
use crate::store::{LayerSource, OccurrenceMatrix, WordIndex};

/// How baseline occurrence pairs are drawn.
pub const BASELINE_PAIR_RULE: &str = "uniform pairs of distinct occurrences; pairs of the same word type rejected";

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = scalar::norm(u);
    let nv = scalar::norm(v);
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::DegenerateVector);
    }
    Ok(clamp_unit(scalar::dot(u, v) / (nu * nv)))
}

fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(-T::one()).min(T::one())
}

/// Mean pairwise cosine between the columns of an occurrence matrix.
///
/// Evaluated in `O(nd)`: with unit columns `û`, the sum over ordered pairs
/// `j != k` of `û_j·û_k` equals `‖Σ û‖² − n`.
pub fn self_similarity<T: Scalar>(m: &OccurrenceMatrix<T>) -> Result<T> {
    let n = m.n();
    if n < 2 {
        return Err(Error::InsufficientOccurrences { needed: 2, found: n });
    }
    let mut sum = vec![T::zero(); m.dim()];
    for col in m.columns.columns() {
        let norm = col.dot(&col).sqrt();
        if norm == T::zero() {
            return Err(Error::DegenerateVector);
        }
        for (s, &x) in sum.iter_mut().zip(col.iter()) {
            *s = *s + x / norm;
        }
    }
    let nt = T::from_usize(n).expect("count fits scalar");
    let pairs = nt * nt - nt;
    Ok(clamp_unit((scalar::dot(&sum, &sum) - nt) / pairs))
}

/// Mean cosine between each token vector of a sentence and the sentence's
/// mean vector.
pub fn intra_sentence_similarity<T: Scalar>(vectors: &[Vec<T>]) -> Result<T> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty sentence".into()));
    }
    let d = vectors[0].len();
    let mut mean = vec![T::zero(); d];
    for v in vectors {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        for (acc, &x) in mean.iter_mut().zip(v) {
            *acc = *acc + x;
        }
    }
    let nt = T::from_usize(n).expect("count fits scalar");
    mean.iter_mut().for_each(|x| *x = *x / nt);
    if scalar::norm(&mean) == T::zero() {
        return Err(Error::DegenerateSentence { sentence_id: 0 });
    }
    let mut total = T::zero();
    for v in vectors {
        total = total + cosine(&mean, v)?;
    }
    Ok(total / nt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MevResult<T> {
    pub word: String,
    pub layer: usize,
    /// Descending; at most `min(d, n)` values.
    pub singular_values: Vec<T>,
    pub mev: T,
}

/// Maximum explainable variance: `σ₁² / Σ σᵢ²` of the uncentered occurrence matrix.
pub fn mev<T: Scalar>(m: &OccurrenceMatrix<T>) -> Result<MevResult<T>> {
    if m.n() < 2 {
        return Err(Error::InsufficientOccurrences {
            needed: 2,
            found: m.n(),
        });
    }
    if m.columns.iter().all(|&x| x == T::zero()) {
        return Err(Error::DegenerateMatrix);
    }
    let singular_values = linalg::singular_values(m.columns.view())?;
    let mev = linalg::explained_variance_ratio(&singular_values)?;
    Ok(MevResult {
        word: m.word.clone(),
        layer: m.layer,
        singular_values,
        mev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Cosine,
    Mev,
}

impl BaselineKind {
    fn name(self) -> &'static str {
        match self {
            BaselineKind::Cosine => "cosine",
            BaselineKind::Mev => "mev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineEstimate {
    pub layer: usize,
    pub kind: BaselineKind,
    pub value: f64,
    pub sample_size: usize,
    pub seed: u64,
}

/// Expected cosine between the vectors of two uniformly drawn occurrences of
/// different word types, estimated from `samples` pairs.
pub fn cosine_baseline<S: LayerSource>(
    source: &S,
    index: &WordIndex,
    layer: usize,
    samples: usize,
    seed: u64,
) -> Result<BaselineEstimate> {
    let dim = source.meta().dim(layer)?;
    if samples < 2 {
        return Err(Error::Contract("baseline needs at least 2 samples".into()));
    }
    let rows = index.total_rows();
    if rows < 2 || index.len() < 2 {
        return Err(Error::InsufficientData(
            "cosine baseline needs occurrences of at least two word types".into(),
        ));
    }
    let mut rng = sampling::rng_for(seed, &[STREAM_COSINE_BASELINE, layer as u64]);
    let mut x = vec![0.0f32; dim];
    let mut y = vec![0.0f32; dim];
    let mut xs = vec![0.0f64; dim];
    let mut ys = vec![0.0f64; dim];
    let mut total = 0.0;
    for _ in 0..samples {
        let (a, b) = loop {
            let a = rng.random_range(0..rows);
            let b = rng.random_range(0..rows);
            if a != b && index.type_of_row(a) != index.type_of_row(b) {
                break (a, b);
            }
        };
        source.read_row_into(layer, a, &mut x)?;
        source.read_row_into(layer, b, &mut y)?;
        widen(&x, &mut xs);
        widen(&y, &mut ys);
        total += cosine(&xs, &ys)?;
    }
    Ok(BaselineEstimate {
        layer,
        kind: BaselineKind::Cosine,
        value: total / samples as f64,
        sample_size: samples,
        seed,
    })
}

fn widen(src: &[f32], dst: &mut [f64]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = f64::from(s);
    }
}

/// Variance share of the first singular value of a `d x k` matrix of `k`
/// uniformly drawn distinct occurrences (`k = min(samples, rows)`).
pub fn mev_baseline<S: LayerSource>(
    source: &S,
    index: &WordIndex,
    layer: usize,
    samples: usize,
    seed: u64,
) -> Result<BaselineEstimate> {
    let dim = source.meta().dim(layer)?;
    if samples < 2 {
        return Err(Error::Contract("baseline needs at least 2 samples".into()));
    }
    let rows = index.total_rows();
    if rows < 2 {
        return Err(Error::InsufficientData(
            "MEV baseline needs at least two occurrences".into(),
        ));
    }
    let mut rng = sampling::rng_for(seed, &[STREAM_MEV_BASELINE, layer as u64]);
    let picked = sampling::sorted_subset(&mut rng, rows, samples);
    let mut m = Array2::<f64>::zeros((dim, picked.len()));
    let mut buf = vec![0.0f32; dim];
    for (j, &r) in picked.iter().enumerate() {
        source.read_row_into(layer, r, &mut buf)?;
        for (dst, &x) in m.column_mut(j).iter_mut().zip(&buf) {
            *dst = f64::from(x);
        }
    }
    if m.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateMatrix);
    }
    let singular_values = linalg::singular_values(m.view())?;
    Ok(BaselineEstimate {
        layer,
        kind: BaselineKind::Mev,
        value: linalg::explained_variance_ratio(&singular_values)?,
        sample_size: picked.len(),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustedMeasure {
    pub raw: f64,
    pub baseline: f64,
    pub adjusted: f64,
}

/// Subtracts a layer baseline from a raw measure of the given kind.
pub fn adjust(raw: f64, measure: BaselineKind, baseline: &BaselineEstimate) -> Result<AdjustedMeasure> {
    if measure != baseline.kind {
        return Err(Error::KindMismatch {
            measure: measure.name(),
            baseline: baseline.kind.name(),
        });
    }
    Ok(AdjustedMeasure {
        raw,
        baseline: baseline.value,
        adjusted: raw - baseline.value,
    })
}

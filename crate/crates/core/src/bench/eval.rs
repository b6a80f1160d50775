use std::collections::{BTreeMap, HashMap};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::data::{AnalogyDataset, CategorizationDataset, SimilarityDataset};
use super::kmeans::{kmeans, purity};
use super::rank::spearman;
use crate::distill::StaticEmbeddingTable;
use crate::error::{Error, Result};
use crate::metrics::cosine;
use crate::scalar::{self, Scalar};

pub const DEFAULT_RESTARTS: usize = 10;

/// JSON Schema for a serialized [`BenchResult`].
pub const RESULT_SCHEMA: &str = include_str!("../../schema/bench_result.schema.json");

/// One benchmark score, serialized as a JSON report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub task: String,
    pub score: f64,
    /// Fraction of dataset items whose words are all in the table.
    pub coverage: f64,
    pub n_evaluated: usize,
    pub seed: Option<u64>,
}

fn require_nonempty<T: Scalar>(table: &StaticEmbeddingTable<T>) -> Result<()> {
    if table.is_empty() {
        return Err(Error::Contract("embedding table is empty".into()));
    }
    Ok(())
}

/// Spearman correlation between table cosines and human scores over the
/// in-vocabulary pairs.
pub fn eval_similarity<T: Scalar>(ds: &SimilarityDataset, table: &StaticEmbeddingTable<T>) -> Result<BenchResult> {
    require_nonempty(table)?;
    let mut model = Vec::new();
    let mut human = Vec::new();
    for p in &ds.pairs {
        if let (Some(a), Some(b)) = (table.get(&p.word1), table.get(&p.word2)) {
            model.push(cosine(a, b)?.to_f64_lossy());
            human.push(p.score);
        }
    }
    if model.len() < 2 {
        return Err(Error::InsufficientCoverage {
            task: "similarity".into(),
            evaluated: model.len(),
            needed: 2,
        });
    }
    Ok(BenchResult {
        task: "similarity".into(),
        score: spearman(&model, &human)?,
        coverage: model.len() as f64 / ds.pairs.len() as f64,
        n_evaluated: model.len(),
        seed: None,
    })
}

const ANALOGY_BATCH: usize = 256;

/// 3CosAdd accuracy: the answer is the vocabulary word maximizing
/// `cos(v, v_a* - v_a + v_b)`, the three query words excluded. Ties go to the
/// lexicographically first word.
pub fn eval_analogy<T: Scalar>(ds: &AnalogyDataset, table: &StaticEmbeddingTable<T>) -> Result<BenchResult> {
    require_nonempty(table)?;
    let words: Vec<&str> = table.entries.keys().map(String::as_str).collect();
    let row_of: HashMap<&str, usize> = words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let mut vocab = Array2::<T>::zeros((words.len(), table.dim));
    for (mut row, v) in vocab.axis_iter_mut(Axis(0)).zip(table.entries.values()) {
        let n = scalar::norm(v);
        if n == T::zero() {
            return Err(Error::DegenerateVector);
        }
        row.iter_mut().zip(v).for_each(|(dst, &x)| *dst = x / n);
    }

    let questions: Vec<[usize; 4]> = ds
        .questions
        .iter()
        .filter_map(|q| {
            Some([
                *row_of.get(q.a.as_str())?,
                *row_of.get(q.a_star.as_str())?,
                *row_of.get(q.b.as_str())?,
                *row_of.get(q.b_star.as_str())?,
            ])
        })
        .collect();
    if questions.is_empty() {
        return Err(Error::InsufficientCoverage {
            task: "analogy".into(),
            evaluated: 0,
            needed: 1,
        });
    }

    let mut correct = 0usize;
    for batch in questions.chunks(ANALOGY_BATCH) {
        let mut targets = Array2::<T>::zeros((batch.len(), table.dim));
        for (mut t, &[a, a_star, b, _]) in targets.axis_iter_mut(Axis(0)).zip(batch) {
            let v = &vocab.row(a_star) - &vocab.row(a) + vocab.row(b);
            t.assign(&v);
        }
        let scores = targets.dot(&vocab.t());
        for (q, &[a, a_star, b, b_star]) in batch.iter().enumerate() {
            let t = targets.row(q);
            if t.dot(&t) == T::zero() {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for (w, &s) in scores.row(q).iter().enumerate() {
                if w == a || w == a_star || w == b {
                    continue;
                }
                if best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((w, s));
                }
            }
            if best.is_some_and(|(w, _)| w == b_star) {
                correct += 1;
            }
        }
    }
    Ok(BenchResult {
        task: "analogy".into(),
        score: correct as f64 / questions.len() as f64,
        coverage: questions.len() as f64 / ds.questions.len() as f64,
        n_evaluated: questions.len(),
        seed: None,
    })
}

/// Purity of a seeded k-means clustering of the in-vocabulary words, with
/// `k` equal to the number of categories they cover.
pub fn eval_categorization<T: Scalar>(
    ds: &CategorizationDataset,
    table: &StaticEmbeddingTable<T>,
    restarts: usize,
    seed: u64,
) -> Result<BenchResult> {
    require_nonempty(table)?;
    let mut label_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (word, category) in &ds.items {
        if let Some(v) = table.get(word) {
            let next = label_ids.len();
            labels.push(*label_ids.entry(category.as_str()).or_insert(next));
            points.push(v.to_vec());
        }
    }
    let k = label_ids.len();
    if k < 2 || points.len() < k {
        return Err(Error::InsufficientCoverage {
            task: "categorization".into(),
            evaluated: points.len(),
            needed: k.max(2),
        });
    }
    let clustering = kmeans(&points, k, restarts, seed);
    Ok(BenchResult {
        task: "categorization".into(),
        score: purity(&clustering.assignments, &labels),
        coverage: points.len() as f64 / ds.items.len() as f64,
        n_evaluated: points.len(),
        seed: Some(seed),
    })
}

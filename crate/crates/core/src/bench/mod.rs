//! Word-vector benchmarks: similarity (Spearman), analogy (3CosAdd) and
//! concept categorization (k-means purity).

mod data;
mod eval;
pub mod kmeans;
mod rank;

pub use data::{
    load_analogy_txt, load_categorization_tsv, load_similarity_tsv, parse_analogy, parse_categorization,
    parse_similarity, AnalogyDataset, AnalogyQuestion, CategorizationDataset, SimilarityDataset, SimilarityPair,
};
pub use eval::{eval_analogy, eval_categorization, eval_similarity, BenchResult, DEFAULT_RESTARTS, RESULT_SCHEMA};
pub use rank::{average_ranks, pearson, spearman};

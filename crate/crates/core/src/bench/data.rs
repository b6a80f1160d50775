//! Benchmark dataset formats.
//!
//! * similarity: `word1<TAB>word2<TAB>score`
//! * analogy: four whitespace-separated words per line; a line `: name` opens a section
//! * categorization: `word<TAB>category`
//!
//! Blank lines are ignored everywhere.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub word1: String,
    pub word2: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub pairs: Vec<SimilarityPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyQuestion {
    /// `a : a_star :: b : b_star`
    pub a: String,
    pub a_star: String,
    pub b: String,
    pub b_star: String,
    pub section: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyDataset {
    pub questions: Vec<AnalogyQuestion>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategorizationDataset {
    pub items: Vec<(String, String)>,
}

impl CategorizationDataset {
    pub fn categories(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for (_, c) in &self.items {
            *counts.entry(c.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_similarity(text: &str, source_name: &str) -> Result<SimilarityDataset> {
    let mut pairs = Vec::new();
    let mut last = 0;
    for (line, raw) in content_lines(text) {
        last = line;
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let [word1, word2, score] = fields[..] else {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        if word1.is_empty() || word2.is_empty() {
            return Err(Error::parse(source_name, line, "empty word"));
        }
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(source_name, line, format!("invalid score {score:?}")))?;
        pairs.push(SimilarityPair {
            word1: word1.to_string(),
            word2: word2.to_string(),
            score,
        });
    }
    if pairs.len() < 2 {
        return Err(Error::parse(
            source_name,
            last,
            "similarity dataset needs at least 2 pairs",
        ));
    }
    Ok(SimilarityDataset { pairs })
}

pub fn parse_analogy(text: &str, source_name: &str) -> Result<AnalogyDataset> {
    let mut questions = Vec::new();
    let mut section = None;
    for (line, raw) in content_lines(text) {
        if let Some(name) = raw.strip_prefix(':') {
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::parse(source_name, line, "unnamed section"));
            }
            section = Some(name.to_string());
            continue;
        }
        let words: Vec<&str> = raw.split_whitespace().collect();
        let [a, a_star, b, b_star] = words[..] else {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected 4 words, found {}", words.len()),
            ));
        };
        questions.push(AnalogyQuestion {
            a: a.to_string(),
            a_star: a_star.to_string(),
            b: b.to_string(),
            b_star: b_star.to_string(),
            section: section.clone(),
        });
    }
    Ok(AnalogyDataset { questions })
}

pub fn parse_categorization(text: &str, source_name: &str) -> Result<CategorizationDataset> {
    let mut items = Vec::new();
    let mut last = 0;
    for (line, raw) in content_lines(text) {
        last = line;
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let [word, category] = fields[..] else {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        };
        if word.is_empty() || category.is_empty() {
            return Err(Error::parse(source_name, line, "empty field"));
        }
        items.push((word.to_string(), category.to_string()));
    }
    let ds = CategorizationDataset { items };
    let cats = ds.categories();
    if cats.len() < 2 {
        return Err(Error::parse(
            source_name,
            last,
            "categorization dataset needs at least 2 categories",
        ));
    }
    if let Some((c, _)) = cats.iter().find(|(_, &n)| n < 2) {
        return Err(Error::parse(
            source_name,
            last,
            format!("category {c:?} has fewer than 2 words"),
        ));
    }
    Ok(ds)
}

pub fn load_similarity_tsv(path: &Path) -> Result<SimilarityDataset> {
    parse_similarity(&read(path)?, &path.display().to_string())
}

pub fn load_analogy_txt(path: &Path) -> Result<AnalogyDataset> {
    parse_analogy(&read(path)?, &path.display().to_string())
}

pub fn load_categorization_tsv(path: &Path) -> Result<CategorizationDataset> {
    parse_categorization(&read(path)?, &path.display().to_string())
}

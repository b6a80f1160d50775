//! First-principal-component static embeddings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{self, Scalar};
use crate::store::{occurrence_matrix, LayerSource, OccurrenceMatrix, WordIndex};

/// Relative gap between the two leading singular values below which the
/// principal direction is reported as ambiguous.
pub const AMBIGUITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponent<T> {
    /// Unit vector, sign fixed by [`pc_static_embedding`]'s convention.
    pub vector: Vec<T>,
    pub sigma1: T,
    /// Set when the top singular value is repeated, so the direction is not unique.
    pub ambiguous: bool,
}

/// Unit left singular vector of the uncentered occurrence matrix for its
/// largest singular value.
///
/// The sign makes the vector point along the column mean. When the mean is
/// orthogonal to it (or zero), the first non-negligible component is made
/// positive.
pub fn pc_static_embedding<T: Scalar>(m: &OccurrenceMatrix<T>) -> Result<PrincipalComponent<T>> {
    if m.n() < 2 {
        return Err(Error::InsufficientOccurrences {
            needed: 2,
            found: m.n(),
        });
    }
    if m.columns.iter().all(|&x| x == T::zero()) {
        return Err(Error::DegenerateMatrix);
    }
    let lead = linalg::leading_singular(m.columns.view())?;
    let mut vector = lead.left.to_vec();
    let sigma1 = lead.singular_values[0];
    let ambiguous = lead
        .singular_values
        .get(1)
        .is_some_and(|&s2| (sigma1 - s2) <= T::lit(AMBIGUITY_TOLERANCE) * sigma1);

    let n = T::from_usize(m.n()).expect("count fits scalar");
    let mean: Vec<T> = m.columns.rows().into_iter().map(|r| r.sum() / n).collect();
    let along = scalar::dot(&vector, &mean);
    // |u| = 1, so the projection is compared against the mean's own length.
    let tie = along.abs() <= T::lit(1e-12) * scalar::norm(&mean).max(T::min_positive_value());
    let flip = if tie {
        vector
            .iter()
            .find(|x| x.abs() > T::lit(1e-9))
            .is_some_and(|&x| x < T::zero())
    } else {
        along < T::zero()
    };
    if flip {
        vector.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(PrincipalComponent {
        vector,
        sigma1,
        ambiguous,
    })
}

/// Word -> unit vector table for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticEmbeddingTable<T> {
    /// Source layer; `None` for tables read from text files.
    pub layer: Option<usize>,
    pub dim: usize,
    pub entries: BTreeMap<String, Vec<T>>,
}

impl<T: Scalar> StaticEmbeddingTable<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone)]
pub struct DistillOutcome<T> {
    pub table: StaticEmbeddingTable<T>,
    /// Words whose leading singular value was repeated.
    pub ambiguous: Vec<String>,
}

/// Distills every eligible word of a layer. Words with more than `cap`
/// occurrences use the same seeded subsample as the metrics.
pub fn distill_table<T: Scalar, S: LayerSource>(
    index: &WordIndex,
    source: &S,
    layer: usize,
    cap: usize,
    seed: u64,
) -> Result<DistillOutcome<T>> {
    let dim = source.meta().dim(layer)?;
    let words = index.eligible_words();
    if words.is_empty() {
        return Err(Error::EmptyTable);
    }
    let components: Vec<(String, PrincipalComponent<T>)> = words
        .par_iter()
        .map(|&w| {
            let m = occurrence_matrix::<T, S>(w, layer, index, source, cap, seed)?;
            Ok((w.to_string(), pc_static_embedding(&m)?))
        })
        .collect::<Result<_>>()?;

    let mut ambiguous = Vec::new();
    let mut entries = BTreeMap::new();
    for (word, pc) in components {
        if pc.ambiguous {
            ambiguous.push(word.clone());
        }
        entries.insert(word, pc.vector);
    }
    Ok(DistillOutcome {
        table: StaticEmbeddingTable {
            layer: Some(layer),
            dim,
            entries,
        },
        ambiguous,
    })
}

/// Renders the table in the word2vec/GloVe text layout with an `N d` header.
pub fn format_table<T: Scalar>(table: &StaticEmbeddingTable<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", table.len(), table.dim).unwrap();
    for (word, v) in &table.entries {
        out.push_str(word);
        for x in v {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_table<T: Scalar>(table: &StaticEmbeddingTable<T>, path: &Path) -> Result<()> {
    fs::write(path, format_table(table)).map_err(|e| Error::io(path, e))
}

fn unit_slack<T: Scalar>() -> T {
    (T::epsilon() * T::lit(64.0)).max(T::lit(1e-12))
}

pub fn read_table<T: Scalar>(path: &Path) -> Result<StaticEmbeddingTable<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}

/// Parses text vectors with or without an `N d` header line. Vectors are
/// normalized to unit length on load; those already unit length to within
/// rounding are kept bit for bit, so written tables re-read unchanged.
pub fn parse_table<T: Scalar>(text: &str, source_name: &str) -> Result<StaticEmbeddingTable<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let mut header = None;
    if let Some((_, first)) = lines.peek() {
        let fields: Vec<&str> = first.split_whitespace().collect();
        if let [count, dim] = fields[..] {
            if let (Ok(count), Ok(dim)) = (count.parse::<usize>(), dim.parse::<usize>()) {
                header = Some((count, dim));
                lines.next();
            }
        }
    }

    let mut dim = header.map(|(_, d)| d);
    let mut entries = BTreeMap::new();
    let mut last_line = 0;
    for (i, line) in lines {
        let lineno = i + 1;
        last_line = lineno;
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-blank line has a field");
        let v = fields
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| Error::parse(source_name, lineno, format!("non-numeric component {f:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        match dim {
            Some(d) if d != v.len() => {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("vector has {} components, expected {d}", v.len()),
                ))
            }
            None if v.is_empty() => return Err(Error::parse(source_name, lineno, "word without vector")),
            None => dim = Some(v.len()),
            _ => {}
        }
        let norm = scalar::norm(&v);
        if norm == T::zero() {
            return Err(Error::parse(source_name, lineno, "zero vector"));
        }
        let unit = if (norm - T::one()).abs() <= unit_slack::<T>() {
            v
        } else {
            v.into_iter().map(|x| x / norm).collect()
        };
        if entries.insert(word.to_string(), unit).is_some() {
            return Err(Error::parse(source_name, lineno, format!("duplicate word {word:?}")));
        }
    }
    if let Some((count, _)) = header {
        if count != entries.len() {
            return Err(Error::parse(
                source_name,
                last_line.max(1),
                format!("header declares {count} words, found {}", entries.len()),
            ));
        }
    }
    Ok(StaticEmbeddingTable {
        layer: None,
        dim: dim.unwrap_or(0),
        entries,
    })
}

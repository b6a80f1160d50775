//! Embedding dump format and the word/sentence indexes built over it.
//!
//! A dump is a directory holding `meta.json` plus one `layer_<l>.bin` per
//! layer. Each payload is little-endian IEEE-754 `f32`, row-major, where row
//! `r` is the vector of the `r`-th token of the corpus (sentences
//! concatenated in id order). Layer 0 is the model's input layer.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{self, STREAM_OCCURRENCES};
use crate::scalar::Scalar;

pub const META_FILE: &str = "meta.json";

pub fn layer_file_name(layer: usize) -> String {
    format!("layer_{layer}.bin")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub sentence_id: usize,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub model_name: String,
    pub layer_count: usize,
    pub dims: Vec<usize>,
    pub sentences: Vec<SentenceRecord>,
    /// Producer-specific metadata (subword pooling, generator parameters, ...).
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DumpMeta {
    /// Builds metadata with consecutive sentence ids.
    pub fn new(model_name: impl Into<String>, dims: Vec<usize>, sentences: Vec<Vec<String>>) -> Self {
        DumpMeta {
            model_name: model_name.into(),
            layer_count: dims.len(),
            dims,
            sentences: sentences
                .into_iter()
                .enumerate()
                .map(|(sentence_id, tokens)| SentenceRecord { sentence_id, tokens })
                .collect(),
            extra: serde_json::Map::new(),
        }
    }

    pub fn total_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// First global row of every sentence, plus the total as a final entry.
    pub fn sentence_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.sentences.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in &self.sentences {
            acc += s.tokens.len();
            offsets.push(acc);
        }
        offsets
    }

    pub fn dim(&self, layer: usize) -> Result<usize> {
        self.dims.get(layer).copied().ok_or(Error::LayerOutOfRange {
            layer,
            layer_count: self.layer_count,
        })
    }

    /// Checks the structural invariants; the message names the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.layer_count == 0 {
            return Err("layer_count must be at least 1".into());
        }
        if self.dims.len() != self.layer_count {
            return Err(format!(
                "dims has {} entries but layer_count is {}",
                self.dims.len(),
                self.layer_count
            ));
        }
        if let Some(l) = self.dims.iter().position(|&d| d == 0) {
            return Err(format!("dims[{l}] is zero"));
        }
        if self.sentences.is_empty() {
            return Err("corpus has no sentences".into());
        }
        for (i, s) in self.sentences.iter().enumerate() {
            if s.sentence_id != i {
                return Err(format!("sentence at position {i} has id {}", s.sentence_id));
            }
            if s.tokens.is_empty() {
                return Err(format!("sentence {i} has no tokens"));
            }
            if s.tokens.iter().any(String::is_empty) {
                return Err(format!("sentence {i} contains an empty token"));
            }
        }
        Ok(())
    }
}

/// Random access to per-layer token vectors.
pub trait LayerSource: Sync {
    fn meta(&self) -> &DumpMeta;

    /// Reads `out.len() / dim` consecutive rows starting at `start_row`.
    fn read_rows_into(&self, layer: usize, start_row: usize, out: &mut [f32]) -> Result<()>;

    fn read_row_into(&self, layer: usize, row: usize, out: &mut [f32]) -> Result<()> {
        self.read_rows_into(layer, row, out)
    }

    fn row(&self, layer: usize, row: usize) -> Result<Vec<f32>> {
        let mut out = vec![0.0; self.meta().dim(layer)?];
        self.read_row_into(layer, row, &mut out)?;
        Ok(out)
    }

    fn rows_as<T: Scalar>(&self, layer: usize, rows: &[usize]) -> Result<Vec<Vec<T>>>
    where
        Self: Sized,
    {
        let mut buf = vec![0.0; self.meta().dim(layer)?];
        rows.iter()
            .map(|&r| {
                self.read_row_into(layer, r, &mut buf)?;
                Ok(buf.iter().map(|&x| T::widen_f32(x)).collect())
            })
            .collect()
    }
}

fn check_read(meta: &DumpMeta, layer: usize, start_row: usize, len: usize) -> Result<usize> {
    let dim = meta.dim(layer)?;
    if !len.is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: len % dim,
        });
    }
    let rows = len / dim;
    let total = meta.total_tokens();
    if start_row + rows > total {
        return Err(Error::Contract(format!(
            "rows {start_row}..{} out of range for {total} tokens",
            start_row + rows
        )));
    }
    Ok(dim)
}

/// A dump held fully in memory, as produced by the synthetic generators.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDump {
    pub meta: DumpMeta,
    /// One row-major payload per layer.
    pub layers: Vec<Vec<f32>>,
}

impl EmbeddingDump {
    pub fn new(meta: DumpMeta, layers: Vec<Vec<f32>>) -> Result<Self> {
        check_payloads(&meta, &layers)?;
        Ok(EmbeddingDump { meta, layers })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_dump(&self.meta, &self.layers, dir)
    }
}

impl LayerSource for EmbeddingDump {
    fn meta(&self) -> &DumpMeta {
        &self.meta
    }

    fn read_rows_into(&self, layer: usize, start_row: usize, out: &mut [f32]) -> Result<()> {
        let dim = check_read(&self.meta, layer, start_row, out.len())?;
        let start = start_row * dim;
        out.copy_from_slice(&self.layers[layer][start..start + out.len()]);
        Ok(())
    }
}

fn check_payloads(meta: &DumpMeta, layers: &[Vec<f32>]) -> Result<()> {
    meta.check().map_err(Error::Format)?;
    if layers.len() != meta.layer_count {
        return Err(Error::Format(format!(
            "{} layer payloads for layer_count {}",
            layers.len(),
            meta.layer_count
        )));
    }
    let rows = meta.total_tokens();
    for (l, payload) in layers.iter().enumerate() {
        if payload.len() != rows * meta.dims[l] {
            return Err(Error::Format(format!(
                "layer {l} holds {} floats, expected {rows} rows x {} dims",
                payload.len(),
                meta.dims[l]
            )));
        }
    }
    Ok(())
}

/// Writes a complete dump. `vectors[l]` is the row-major payload of layer `l`.
pub fn write_dump(meta: &DumpMeta, vectors: &[Vec<f32>], dir: &Path) -> Result<()> {
    check_payloads(meta, vectors)?;
    let writer = DumpWriter::create(dir, meta.clone())?;
    for (l, payload) in vectors.iter().enumerate() {
        let mut layer = writer.layer(l)?;
        layer.write_rows(payload)?;
        layer.finish()?;
    }
    writer.finish()
}

/// Streaming dump writer for corpora that do not fit in memory.
///
/// Layers may be written in any order; `meta.json` is written by
/// [`DumpWriter::finish`] once every payload has its full length, so an
/// interrupted write never leaves a loadable dump behind.
#[derive(Debug)]
pub struct DumpWriter {
    dir: PathBuf,
    meta: DumpMeta,
    rows: u64,
}

impl DumpWriter {
    pub fn create(dir: &Path, meta: DumpMeta) -> Result<Self> {
        meta.check().map_err(Error::Format)?;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let rows = meta.total_tokens() as u64;
        Ok(DumpWriter {
            dir: dir.to_path_buf(),
            meta,
            rows,
        })
    }

    pub fn meta(&self) -> &DumpMeta {
        &self.meta
    }

    /// Creates (or truncates) the payload file of one layer.
    pub fn layer(&self, layer: usize) -> Result<LayerWriter> {
        let dim = self.meta.dim(layer)?;
        let path = self.dir.join(layer_file_name(layer));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(LayerWriter {
            out: BufWriter::with_capacity(1 << 20, file),
            path,
            dim,
            expected: self.rows * dim as u64,
            written: 0,
        })
    }

    pub fn finish(self) -> Result<()> {
        for (l, &dim) in self.meta.dims.iter().enumerate() {
            let path = self.dir.join(layer_file_name(l));
            let expected = self.rows * dim as u64 * 4;
            match fs::metadata(&path) {
                Ok(m) if m.len() == expected => {}
                Ok(m) => {
                    return Err(Error::Format(format!(
                        "{}: {} bytes written, expected {expected}",
                        path.display(),
                        m.len()
                    )))
                }
                Err(_) => return Err(Error::Format(format!("layer {l} was never written"))),
            }
        }
        let path = self.dir.join(META_FILE);
        let json = serde_json::to_vec_pretty(&self.meta).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }
}

pub struct LayerWriter {
    out: BufWriter<File>,
    path: PathBuf,
    dim: usize,
    expected: u64,
    written: u64,
}

impl LayerWriter {
    /// Appends whole rows; `rows.len()` must be a multiple of the layer dimension.
    pub fn write_rows(&mut self, rows: &[f32]) -> Result<()> {
        if !rows.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rows.len() % self.dim,
            });
        }
        if self.written + rows.len() as u64 > self.expected {
            return Err(Error::Format(format!(
                "{}: more rows than the corpus has tokens",
                self.path.display()
            )));
        }
        let mut bytes = Vec::with_capacity(rows.len() * 4);
        for x in rows {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        self.out.write_all(&bytes).map_err(|e| Error::io(&self.path, e))?;
        self.written += rows.len() as u64;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.expected {
            return Err(Error::Format(format!(
                "{}: wrote {} floats, expected {}",
                self.path.display(),
                self.written,
                self.expected
            )));
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// A dump opened from disk. Rows are fetched with positioned reads, so
/// memory use is independent of payload size.
#[derive(Debug)]
pub struct Dump {
    dir: PathBuf,
    meta: DumpMeta,
    files: Vec<File>,
}

impl Dump {
    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Opens a dump directory, validating `meta.json` and every payload length.
pub fn load_dump(dir: &Path) -> Result<Dump> {
    let meta_path = dir.join(META_FILE);
    let raw = match fs::read(&meta_path) {
        Ok(raw) => raw,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(meta_path)),
        Err(e) => return Err(Error::io(&meta_path, e)),
    };
    let meta: DumpMeta = serde_json::from_slice(&raw).map_err(|e| Error::Schema {
        path: meta_path.clone(),
        message: e.to_string(),
    })?;
    meta.check().map_err(|message| Error::Schema {
        path: meta_path.clone(),
        message,
    })?;

    let rows = meta.total_tokens() as u64;
    let mut files = Vec::with_capacity(meta.layer_count);
    for (l, &dim) in meta.dims.iter().enumerate() {
        let path = dir.join(layer_file_name(l));
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(path)),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let actual = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        let expected = rows * dim as u64 * 4;
        if actual < expected {
            return Err(Error::TruncatedPayload { path, expected, actual });
        }
        if actual > expected {
            return Err(Error::OversizedPayload { path, expected, actual });
        }
        files.push(file);
    }
    let extra = dir.join(layer_file_name(meta.layer_count));
    if extra.exists() {
        return Err(Error::Schema {
            path: meta_path,
            message: format!("layer_count is {} but {} is present", meta.layer_count, extra.display()),
        });
    }
    Ok(Dump {
        dir: dir.to_path_buf(),
        meta,
        files,
    })
}

#[cfg(unix)]
fn read_exact_at(file: &File, buf: &mut [u8], offset: u64) -> std::io::Result<()> {
    use std::os::unix::fs::FileExt;
    file.read_exact_at(buf, offset)
}

#[cfg(windows)]
fn read_exact_at(file: &File, mut buf: &mut [u8], mut offset: u64) -> std::io::Result<()> {
    use std::os::windows::fs::FileExt;
    while !buf.is_empty() {
        match file.seek_read(buf, offset)? {
            0 => return Err(std::io::ErrorKind::UnexpectedEof.into()),
            n => {
                buf = &mut buf[n..];
                offset += n as u64;
            }
        }
    }
    Ok(())
}

impl LayerSource for Dump {
    fn meta(&self) -> &DumpMeta {
        &self.meta
    }

    fn read_rows_into(&self, layer: usize, start_row: usize, out: &mut [f32]) -> Result<()> {
        let dim = check_read(&self.meta, layer, start_row, out.len())?;
        let mut bytes = vec![0u8; out.len() * 4];
        let offset = (start_row * dim * 4) as u64;
        read_exact_at(&self.files[layer], &mut bytes, offset)
            .map_err(|e| Error::io(self.dir.join(layer_file_name(layer)), e))?;
        for (x, chunk) in out.iter_mut().zip(bytes.chunks_exact(4)) {
            *x = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccurrenceRef {
    pub sentence_id: usize,
    pub token_index: usize,
    pub global_row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEntry {
    /// Occurrences in corpus order.
    pub occurrences: Vec<OccurrenceRef>,
    /// Number of distinct sentence ids among the occurrences.
    pub unique_contexts: usize,
}

/// Word -> occurrences index over a dump's token stream.
#[derive(Debug, Clone)]
pub struct WordIndex {
    words: Vec<String>,
    entries: Vec<WordEntry>,
    lookup: HashMap<String, u32>,
    row_types: Vec<u32>,
    min_contexts: usize,
    fold_case: bool,
}

/// Indexes every token of the corpus. With `fold_case`, tokens are lowercased
/// before indexing and queries are folded the same way.
pub fn build_index(meta: &DumpMeta, min_contexts: usize, fold_case: bool) -> Result<WordIndex> {
    if min_contexts == 0 {
        return Err(Error::Contract("min_contexts must be at least 1".into()));
    }
    let mut grouped: BTreeMap<String, Vec<OccurrenceRef>> = BTreeMap::new();
    let mut global_row = 0;
    for s in &meta.sentences {
        for (token_index, token) in s.tokens.iter().enumerate() {
            let key = if fold_case { token.to_lowercase() } else { token.clone() };
            grouped.entry(key).or_default().push(OccurrenceRef {
                sentence_id: s.sentence_id,
                token_index,
                global_row,
            });
            global_row += 1;
        }
    }

    let mut words = Vec::with_capacity(grouped.len());
    let mut entries = Vec::with_capacity(grouped.len());
    let mut lookup = HashMap::with_capacity(grouped.len());
    let mut row_types = vec![0u32; global_row];
    for (id, (word, occurrences)) in grouped.into_iter().enumerate() {
        let mut unique_contexts = 0;
        let mut last = None;
        for occ in &occurrences {
            row_types[occ.global_row] = id as u32;
            if last != Some(occ.sentence_id) {
                unique_contexts += 1;
                last = Some(occ.sentence_id);
            }
        }
        lookup.insert(word.clone(), id as u32);
        words.push(word);
        entries.push(WordEntry {
            occurrences,
            unique_contexts,
        });
    }
    Ok(WordIndex {
        words,
        entries,
        lookup,
        row_types,
        min_contexts,
        fold_case,
    })
}

impl WordIndex {
    pub fn min_contexts(&self) -> usize {
        self.min_contexts
    }

    pub fn fold_case(&self) -> bool {
        self.fold_case
    }

    /// Number of distinct word types.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn total_rows(&self) -> usize {
        self.row_types.len()
    }

    fn id(&self, word: &str) -> Option<usize> {
        if self.fold_case {
            self.lookup.get(&word.to_lowercase())
        } else {
            self.lookup.get(word)
        }
        .map(|&id| id as usize)
    }

    pub fn get(&self, word: &str) -> Option<&WordEntry> {
        self.id(word).map(|id| &self.entries[id])
    }

    pub fn unique_contexts(&self, word: &str) -> usize {
        self.get(word).map_or(0, |e| e.unique_contexts)
    }

    pub fn is_eligible(&self, word: &str) -> bool {
        self.unique_contexts(word) >= self.min_contexts
    }

    /// All indexed words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Eligible words in lexicographic order.
    pub fn eligible_words(&self) -> Vec<&str> {
        self.words
            .iter()
            .zip(&self.entries)
            .filter(|(_, e)| e.unique_contexts >= self.min_contexts)
            .map(|(w, _)| w.as_str())
            .collect()
    }

    /// Word type id of a global row; ids follow lexicographic word order.
    pub fn type_of_row(&self, row: usize) -> u32 {
        self.row_types[row]
    }

    pub fn word_of_row(&self, row: usize) -> &str {
        &self.words[self.row_types[row] as usize]
    }
}

/// The `d x n` matrix of one word's vectors in one layer, one column per
/// occurrence in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceMatrix<T> {
    pub word: String,
    pub layer: usize,
    pub columns: Array2<T>,
    /// Occurrences backing each column; empty for hand-built matrices.
    pub occurrences: Vec<OccurrenceRef>,
    /// Occurrence count before capping.
    pub total_occurrences: usize,
}

impl<T: Scalar> OccurrenceMatrix<T> {
    /// Builds a matrix from explicit column vectors.
    pub fn from_columns(word: impl Into<String>, layer: usize, columns: &[Vec<T>]) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(Error::InsufficientOccurrences { needed: 1, found: 0 });
        }
        let d = columns[0].len();
        let mut m = Array2::zeros((d, n));
        for (j, col) in columns.iter().enumerate() {
            if col.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: col.len(),
                });
            }
            for (i, &x) in col.iter().enumerate() {
                m[[i, j]] = x;
            }
        }
        Ok(OccurrenceMatrix {
            word: word.into(),
            layer,
            columns: m,
            occurrences: Vec::new(),
            total_occurrences: n,
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn n(&self) -> usize {
        self.columns.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.columns.column(j).to_vec()
    }
}

/// Gathers one word's layer vectors. Words with more than `cap` occurrences
/// are subsampled uniformly (corpus order kept); the subsample depends only on
/// `(seed, word)`, so every layer sees the same occurrences.
pub fn occurrence_matrix<T: Scalar, S: LayerSource>(
    word: &str,
    layer: usize,
    index: &WordIndex,
    source: &S,
    cap: usize,
    seed: u64,
) -> Result<OccurrenceMatrix<T>> {
    let meta = source.meta();
    let dim = meta.dim(layer)?;
    if cap == 0 {
        return Err(Error::Contract("occurrence cap must be at least 1".into()));
    }
    let entry = index.get(word).filter(|e| e.unique_contexts >= index.min_contexts());
    let Some(entry) = entry else {
        return Err(Error::Ineligible {
            word: word.to_string(),
            contexts: index.unique_contexts(word),
            min_contexts: index.min_contexts(),
        });
    };
    let total = entry.occurrences.len();
    let chosen: Vec<OccurrenceRef> = if total > cap {
        let mut rng = sampling::rng_for(seed, &[STREAM_OCCURRENCES, sampling::word_key(word)]);
        sampling::sorted_subset(&mut rng, total, cap)
            .into_iter()
            .map(|i| entry.occurrences[i])
            .collect()
    } else {
        entry.occurrences.clone()
    };

    let mut columns = Array2::zeros((dim, chosen.len()));
    let mut buf = vec![0.0f32; dim];
    for (j, occ) in chosen.iter().enumerate() {
        source.read_row_into(layer, occ.global_row, &mut buf)?;
        for (dst, &x) in columns.column_mut(j).iter_mut().zip(&buf) {
            *dst = T::widen_f32(x);
        }
    }
    Ok(OccurrenceMatrix {
        word: word.to_string(),
        layer,
        columns,
        occurrences: chosen,
        total_occurrences: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn small_dump() -> EmbeddingDump {
        let meta = DumpMeta::new("toy", vec![4], vec![toks("a b c"), toks("d e")]);
        let payload = (0..20).map(|x| x as f32 * 0.5 - 3.0).collect();
        EmbeddingDump::new(meta, vec![payload]).unwrap()
    }

    #[test]
    fn payload_size_is_rows_times_dim_times_four() {
        let dir = tempfile::tempdir().unwrap();
        small_dump().write(dir.path()).unwrap();
        let len = fs::metadata(dir.path().join("layer_0.bin")).unwrap().len();
        assert_eq!(len, 80);
    }

    #[test]
    fn empty_corpus_is_a_format_error() {
        let meta = DumpMeta::new("toy", vec![4], vec![]);
        let dir = tempfile::tempdir().unwrap();
        let err = write_dump(&meta, &[vec![]], dir.path()).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn row_count_mismatch_is_a_format_error() {
        let meta = DumpMeta::new("toy", vec![4], vec![toks("a b")]);
        let dir = tempfile::tempdir().unwrap();
        let err = write_dump(&meta, &[vec![0.0; 12]], dir.path()).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn accessor_returns_fifth_token() {
        let dir = tempfile::tempdir().unwrap();
        let dump = small_dump();
        dump.write(dir.path()).unwrap();
        let loaded = load_dump(dir.path()).unwrap();
        assert_eq!(loaded.row(0, 4).unwrap(), dump.layers[0][16..20].to_vec());
        assert_eq!(loaded.meta(), &dump.meta);
    }

    #[test]
    fn truncated_payload_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        small_dump().write(dir.path()).unwrap();
        let path = dir.path().join("layer_0.bin");
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
        match load_dump(dir.path()).unwrap_err() {
            Error::TruncatedPayload {
                path: p,
                expected,
                actual,
            } => {
                assert_eq!(p, path);
                assert_eq!((expected, actual), (80, 79));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_layer_file_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        small_dump().write(dir.path()).unwrap();
        let meta_path = dir.path().join(META_FILE);
        let mut meta: DumpMeta = serde_json::from_slice(&fs::read(&meta_path).unwrap()).unwrap();
        meta.layer_count = 2;
        meta.dims = vec![4, 4];
        fs::write(&meta_path, serde_json::to_vec(&meta).unwrap()).unwrap();
        match load_dump(dir.path()).unwrap_err() {
            Error::MissingFile(p) => assert!(p.ends_with("layer_1.bin")),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn schema_violation_names_meta_file() {
        let dir = tempfile::tempdir().unwrap();
        small_dump().write(dir.path()).unwrap();
        fs::write(
            dir.path().join(META_FILE),
            br#"{"model_name": "x", "layer_count": "one"}"#,
        )
        .unwrap();
        match load_dump(dir.path()).unwrap_err() {
            Error::Schema { path, .. } => assert!(path.ends_with(META_FILE)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_meta_fields_survive_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut dump = small_dump();
        dump.meta.extra.insert("pooling".into(), "mean".into());
        dump.write(dir.path()).unwrap();
        let loaded = load_dump(dir.path()).unwrap();
        assert_eq!(loaded.meta().extra["pooling"], "mean");
    }

    #[test]
    fn eligibility_counts_distinct_sentences() {
        let mut sentences: Vec<Vec<String>> = (0..5).map(|i| toks(&format!("dog x{i}"))).collect();
        sentences.push(toks("cat cat cat"));
        sentences.push(toks("cat cat cat"));
        let meta = DumpMeta::new("toy", vec![2], sentences);
        let index = build_index(&meta, 5, false).unwrap();
        assert!(index.is_eligible("dog"));
        assert_eq!(index.get("cat").unwrap().occurrences.len(), 6);
        assert_eq!(index.unique_contexts("cat"), 2);
        assert!(!index.is_eligible("cat"));
    }

    #[test]
    fn repeated_word_in_one_sentence() {
        let meta = DumpMeta::new("toy", vec![2], vec![toks("a the b the")]);
        let index = build_index(&meta, 1, false).unwrap();
        let e = index.get("the").unwrap();
        assert_eq!(e.occurrences.len(), 2);
        assert_eq!(e.unique_contexts, 1);
        assert_eq!(e.occurrences[1].global_row, 3);
    }

    #[test]
    fn case_folding_merges_types() {
        let meta = DumpMeta::new("toy", vec![2], vec![toks("The cat"), toks("the dog")]);
        let exact = build_index(&meta, 1, false).unwrap();
        assert_eq!(exact.unique_contexts("the"), 1);
        let folded = build_index(&meta, 1, true).unwrap();
        assert_eq!(folded.unique_contexts("the"), 2);
        assert_eq!(folded.unique_contexts("THE"), 2);
    }

    #[test]
    fn zero_min_contexts_is_rejected() {
        let meta = DumpMeta::new("toy", vec![2], vec![toks("a")]);
        assert!(matches!(build_index(&meta, 0, false), Err(Error::Contract(_))));
    }

    fn repeated_word_dump(occurrences: usize) -> EmbeddingDump {
        let sentences: Vec<Vec<String>> = (0..occurrences).map(|_| toks("w")).collect();
        let meta = DumpMeta::new("toy", vec![2], sentences);
        let payload = (0..occurrences).flat_map(|i| [i as f32, 1.0]).collect();
        EmbeddingDump::new(meta, vec![payload]).unwrap()
    }

    #[test]
    fn occurrence_matrix_small_word_keeps_all_columns() {
        let dump = repeated_word_dump(7);
        let index = build_index(&dump.meta, 5, false).unwrap();
        let m = occurrence_matrix::<f64, _>("w", 0, &index, &dump, 1000, 1).unwrap();
        assert_eq!(m.n(), 7);
        assert_eq!(m.column(3), vec![3.0, 1.0]);
    }

    #[test]
    fn occurrence_matrix_caps_deterministically() {
        let dump = repeated_word_dump(5000);
        let index = build_index(&dump.meta, 5, false).unwrap();
        let a = occurrence_matrix::<f64, _>("w", 0, &index, &dump, 1000, 9).unwrap();
        let b = occurrence_matrix::<f64, _>("w", 0, &index, &dump, 1000, 9).unwrap();
        let c = occurrence_matrix::<f64, _>("w", 0, &index, &dump, 1000, 10).unwrap();
        assert_eq!(a.n(), 1000);
        assert_eq!(a.total_occurrences, 5000);
        assert_eq!(a, b);
        assert_ne!(a.occurrences, c.occurrences);
        assert!(a.occurrences.windows(2).all(|w| w[0].global_row < w[1].global_row));
    }

    #[test]
    fn occurrence_matrix_errors() {
        let dump = repeated_word_dump(3);
        let index = build_index(&dump.meta, 5, false).unwrap();
        assert!(matches!(
            occurrence_matrix::<f64, _>("w", 0, &index, &dump, 10, 0),
            Err(Error::Ineligible { contexts: 3, .. })
        ));
        let index = build_index(&dump.meta, 1, false).unwrap();
        assert!(matches!(
            occurrence_matrix::<f64, _>("w", 1, &index, &dump, 10, 0),
            Err(Error::LayerOutOfRange {
                layer: 1,
                layer_count: 1
            })
        ));
    }
}

//! Seeded synthetic corpora with known geometry.
//!
//! * `isotropic`: every token vector is an independent normalized Gaussian.
//! * `cone`: a shared mean of norm `mu` plus Gaussian noise of unit expected norm.
//! * `static`: each word type has one fixed unit vector, reused in every layer.
//! * `toy_contextual`: layer 0 holds fixed per-word vectors; layer `l` mixes
//!   each token with the mean of its ±2 window by weight `lambda[l]`,
//!   renormalizes, then applies a fixed random rotation. `mu` adds a shared
//!   offset to the emitted vectors of layers 1 and up without feeding it
//!   forward.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{self, STREAM_SYNTH};
use crate::store::{DumpMeta, DumpWriter, EmbeddingDump, LayerWriter};

pub mod oracle;

const WINDOW: usize = 2;

const TAG_TOKENS: u64 = 1;
const TAG_LAYER: u64 = 2;
const TAG_MEAN: u64 = 3;
const TAG_WORDS: u64 = 4;
const TAG_ROTATION: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Isotropic,
    Cone,
    Static,
    ToyContextual,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isotropic" => Ok(SynthKind::Isotropic),
            "cone" => Ok(SynthKind::Cone),
            "static" => Ok(SynthKind::Static),
            "toy_contextual" | "toy-contextual" => Ok(SynthKind::ToyContextual),
            other => Err(Error::Contract(format!("unknown synthetic kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub d: usize,
    pub sentences: usize,
    pub sentence_length: usize,
    pub vocab: usize,
    /// Layer count for every kind except `toy_contextual`, which uses `lambdas.len()`.
    pub layers: usize,
    /// Shared-mean norm (`cone`) or offset (`toy_contextual`).
    pub mu: f64,
    /// Per-layer mixing weights for `toy_contextual`; `lambdas[0]` must be 0.
    pub lambdas: Vec<f64>,
    /// Zipf exponent for token frequencies; uniform when absent.
    pub zipf: Option<f64>,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(kind: SynthKind) -> Self {
        SynthSpec {
            kind,
            d: 64,
            sentences: 1000,
            sentence_length: 10,
            vocab: 200,
            layers: 1,
            mu: 0.0,
            lambdas: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            zipf: None,
            seed: 0,
        }
    }

    pub fn layer_count(&self) -> usize {
        match self.kind {
            SynthKind::ToyContextual => self.lambdas.len(),
            _ => self.layers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Contract(m.to_string()));
        if self.d < 2 {
            return bad("d must be at least 2");
        }
        if self.sentences == 0 || self.sentence_length == 0 || self.vocab == 0 {
            return bad("sentences, sentence_length and vocab must be positive");
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return bad("mu must be finite and non-negative");
        }
        if let Some(s) = self.zipf {
            if !(s.is_finite() && s >= 0.0) {
                return bad("zipf exponent must be finite and non-negative");
            }
        }
        match self.kind {
            SynthKind::ToyContextual => {
                if self.lambdas.is_empty() {
                    return bad("toy_contextual needs at least one lambda");
                }
                if self.lambdas[0] != 0.0 {
                    return bad("lambda for layer 0 must be 0");
                }
                if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
                    return bad("lambdas must lie in [0, 1]");
                }
            }
            _ if self.layers == 0 => return bad("layers must be at least 1"),
            _ => {}
        }
        Ok(())
    }

    fn rng(&self, tags: &[u64]) -> ChaCha8Rng {
        let mut stream = vec![STREAM_SYNTH];
        stream.extend_from_slice(tags);
        sampling::rng_for(self.seed, &stream)
    }

    fn meta(&self) -> Result<(DumpMeta, Vec<usize>)> {
        let mut rng = self.rng(&[TAG_TOKENS]);
        let zipf = match self.zipf {
            Some(s) => Some(Zipf::new(self.vocab as f64, s).map_err(|e| Error::Contract(e.to_string()))?),
            None => None,
        };
        let total = self.sentences * self.sentence_length;
        let mut ids = Vec::with_capacity(total);
        for _ in 0..total {
            let id = match &zipf {
                Some(z) => (z.sample(&mut rng) as usize).clamp(1, self.vocab) - 1,
                None => rng.random_range(0..self.vocab),
            };
            ids.push(id);
        }
        let sentences = ids
            .chunks(self.sentence_length)
            .map(|s| s.iter().map(|&id| format!("w{id}")).collect())
            .collect();
        let mut meta = DumpMeta::new(
            format!(
                "synthetic-{}",
                serde_json::to_value(self.kind).unwrap().as_str().unwrap()
            ),
            vec![self.d; self.layer_count()],
            sentences,
        );
        meta.extra.insert(
            "synth".into(),
            serde_json::to_value(self).map_err(|e| Error::Format(e.to_string()))?,
        );
        Ok((meta, ids))
    }
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn unit_gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut v = gaussian(rng, d);
    normalize(&mut v);
    v
}

/// Random orthogonal matrix (row-major) from Gram-Schmidt on Gaussian rows.
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    while q.len() < d {
        let mut v = gaussian(rng, d);
        for _ in 0..2 {
            for u in &q {
                let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, &ux)| *x -= p * ux);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            q.push(v);
        }
    }
    q.concat()
}

fn word_vectors(spec: &SynthSpec) -> Vec<Vec<f64>> {
    let mut rng = spec.rng(&[TAG_WORDS]);
    (0..spec.vocab).map(|_| unit_gaussian(&mut rng, spec.d)).collect()
}

fn to_f32(v: &[f64], out: &mut Vec<f32>) {
    out.extend(v.iter().map(|&x| x as f32));
}

/// Emits every layer in order through `sink(layer, rows)`; rows arrive in
/// corpus order, possibly in several chunks per layer.
fn emit_layers(spec: &SynthSpec, token_ids: &[usize], sink: &mut dyn FnMut(usize, &[f32]) -> Result<()>) -> Result<()> {
    let d = spec.d;
    let chunk_rows = spec.sentence_length * 64;
    match spec.kind {
        SynthKind::Isotropic | SynthKind::Cone => {
            let mean = {
                let mut rng = spec.rng(&[TAG_MEAN]);
                unit_gaussian(&mut rng, d)
            };
            let noise_scale = 1.0 / (d as f64).sqrt();
            for layer in 0..spec.layer_count() {
                let mut rng = spec.rng(&[TAG_LAYER, layer as u64]);
                let mut buf = Vec::with_capacity(chunk_rows * d);
                for (row, _) in token_ids.iter().enumerate() {
                    let v = if spec.kind == SynthKind::Isotropic {
                        unit_gaussian(&mut rng, d)
                    } else {
                        gaussian(&mut rng, d)
                            .into_iter()
                            .zip(&mean)
                            .map(|(e, m)| spec.mu * m + e * noise_scale)
                            .collect()
                    };
                    to_f32(&v, &mut buf);
                    if (row + 1) % chunk_rows == 0 {
                        sink(layer, &buf)?;
                        buf.clear();
                    }
                }
                if !buf.is_empty() {
                    sink(layer, &buf)?;
                }
            }
        }
        SynthKind::Static => {
            let words = word_vectors(spec);
            for layer in 0..spec.layer_count() {
                let mut buf = Vec::with_capacity(chunk_rows * d);
                for chunk in token_ids.chunks(chunk_rows) {
                    buf.clear();
                    for &id in chunk {
                        to_f32(&words[id], &mut buf);
                    }
                    sink(layer, &buf)?;
                }
            }
        }
        SynthKind::ToyContextual => {
            let words = word_vectors(spec);
            let mean = {
                let mut rng = spec.rng(&[TAG_MEAN]);
                unit_gaussian(&mut rng, d)
            };
            let mut state: Vec<Vec<f64>> = token_ids.iter().map(|&id| words[id].clone()).collect();
            for (layer, &lambda) in spec.lambdas.iter().enumerate() {
                if layer > 0 {
                    let rotation = {
                        let mut rng = spec.rng(&[TAG_ROTATION, layer as u64]);
                        random_rotation(&mut rng, d)
                    };
                    let mut next = Vec::with_capacity(state.len());
                    for sentence in state.chunks(spec.sentence_length) {
                        let n = sentence.len();
                        for i in 0..n {
                            let lo = i.saturating_sub(WINDOW);
                            let hi = (i + WINDOW).min(n - 1);
                            let width = (hi - lo + 1) as f64;
                            let mut mixed = vec![0.0; d];
                            for k in 0..d {
                                let window_mean = sentence[lo..=hi].iter().map(|v| v[k]).sum::<f64>() / width;
                                mixed[k] = (1.0 - lambda) * sentence[i][k] + lambda * window_mean;
                            }
                            normalize(&mut mixed);
                            let rotated = (0..d)
                                .map(|r| {
                                    rotation[r * d..(r + 1) * d]
                                        .iter()
                                        .zip(&mixed)
                                        .map(|(a, b)| a * b)
                                        .sum()
                                })
                                .collect();
                            next.push(rotated);
                        }
                    }
                    state = next;
                }
                let mut buf = Vec::with_capacity(chunk_rows * d);
                for chunk in state.chunks(chunk_rows) {
                    buf.clear();
                    for v in chunk {
                        if layer > 0 && spec.mu > 0.0 {
                            let shifted: Vec<f64> = v.iter().zip(&mean).map(|(x, m)| x + spec.mu * m).collect();
                            to_f32(&shifted, &mut buf);
                        } else {
                            to_f32(v, &mut buf);
                        }
                    }
                    sink(layer, &buf)?;
                }
            }
        }
    }
    Ok(())
}

/// Generates an in-memory dump.
pub fn generate(spec: &SynthSpec) -> Result<EmbeddingDump> {
    spec.validate()?;
    let (meta, ids) = spec.meta()?;
    let mut layers: Vec<Vec<f32>> = vec![Vec::with_capacity(ids.len() * spec.d); spec.layer_count()];
    emit_layers(spec, &ids, &mut |layer, rows| {
        layers[layer].extend_from_slice(rows);
        Ok(())
    })?;
    EmbeddingDump::new(meta, layers)
}

/// Generates a dump straight to disk, holding at most one layer in memory
/// (`toy_contextual`) or one chunk of rows (other kinds).
pub fn generate_to_dir(spec: &SynthSpec, dir: &Path) -> Result<DumpMeta> {
    spec.validate()?;
    let (meta, ids) = spec.meta()?;
    let writer = DumpWriter::create(dir, meta.clone())?;
    let mut current: Option<(usize, LayerWriter)> = None;
    emit_layers(spec, &ids, &mut |layer, rows| {
        if current.as_ref().is_none_or(|(l, _)| *l != layer) {
            if let Some((_, w)) = current.take() {
                w.finish()?;
            }
            current = Some((layer, writer.layer(layer)?));
        }
        current.as_mut().expect("layer writer").1.write_rows(rows)
    })?;
    if let Some((_, w)) = current.take() {
        w.finish()?;
    }
    writer.finish()?;
    Ok(meta)
}

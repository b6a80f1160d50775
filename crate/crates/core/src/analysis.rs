//! End-to-end contextuality analysis of a dump: per-layer baselines, mean
//! raw and anisotropy-adjusted measures, and per-word rankings.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, adjust, cosine_baseline, mev_baseline, BaselineEstimate, BaselineKind, BASELINE_PAIR_RULE};
use crate::sampling::{self, STREAM_SENTENCE_SAMPLE, STREAM_WORD_SAMPLE};
use crate::store::{build_index, occurrence_matrix, LayerSource, WordIndex};

pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const CONTEXT_RULE: &str = "distinct sentence ids";
pub const MEV_CONVENTION: &str = "singular values of the uncentered occurrence matrix";
pub const RANKED_WORDS: usize = 20;

/// JSON Schema for [`AnalysisReport::to_json`] output.
pub const REPORT_SCHEMA: &str = include_str!("../schema/analysis_report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordSample {
    /// Uniform sample of this many eligible words (all of them if fewer).
    Count(usize),
    All,
}

impl std::str::FromStr for WordSample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(WordSample::All);
        }
        s.parse()
            .map(WordSample::Count)
            .map_err(|_| Error::Contract(format!("word sample must be a count or \"all\", got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub min_contexts: usize,
    /// Occurrence pairs (cosine) and occurrences (MEV) drawn per baseline.
    pub samples: usize,
    /// Sentences drawn for intra-sentence similarity.
    pub sentences: usize,
    pub word_sample: WordSample,
    /// Maximum occurrences per word fed to the metrics.
    pub cap: usize,
    pub seed: u64,
    pub fold_case: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            min_contexts: 5,
            samples: 1000,
            sentences: 500,
            word_sample: WordSample::Count(1000),
            cap: 1000,
            seed: 0,
            fold_case: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub layer: usize,
    pub cosine_baseline: f64,
    pub mev_baseline: f64,
    pub mean_selfsim_raw: f64,
    pub mean_selfsim_adjusted: f64,
    pub mean_intrasim_raw: f64,
    pub mean_intrasim_adjusted: f64,
    pub mean_mev_raw: f64,
    pub mean_mev_adjusted: f64,
    pub n_words: usize,
    pub n_sentences: usize,
    pub seed: u64,
    pub min_contexts: usize,
    pub cap: usize,
    pub baselines: [BaselineEstimate; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordLayerScores {
    pub layer: usize,
    pub selfsim_raw: f64,
    pub selfsim_adjusted: f64,
    pub mev_raw: f64,
    pub mev_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordReport {
    pub word: String,
    pub occurrences: usize,
    pub unique_contexts: usize,
    /// Mean over layers of the adjusted self-similarity; the ranking key.
    pub mean_selfsim_adjusted: f64,
    pub layers: Vec<WordLayerScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub format_version: u32,
    pub model_name: String,
    pub layer_count: usize,
    pub total_tokens: usize,
    pub total_sentences: usize,
    pub eligible_words: usize,
    pub config: AnalyzeConfig,
    pub context_rule: String,
    pub baseline_pair_rule: String,
    pub mev_convention: String,
    pub layers: Vec<LayerReport>,
    /// Highest mean adjusted self-similarity first.
    pub top_words: Vec<WordReport>,
    /// Lowest mean adjusted self-similarity first.
    pub bottom_words: Vec<WordReport>,
}

struct WordLayerRaw {
    selfsim: f64,
    mev: f64,
}

fn sample_words<'a>(index: &'a WordIndex, cfg: &AnalyzeConfig) -> Vec<&'a str> {
    let eligible = index.eligible_words();
    match cfg.word_sample {
        WordSample::All => eligible,
        WordSample::Count(k) => {
            let mut rng = sampling::rng_for(cfg.seed, &[STREAM_WORD_SAMPLE]);
            sampling::sorted_subset(&mut rng, eligible.len(), k)
                .into_iter()
                .map(|i| eligible[i])
                .collect()
        }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Runs every measure over every layer of `source`.
pub fn analyze<S: LayerSource>(source: &S, cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    if cfg.cap < 2 {
        return Err(Error::Contract("cap must be at least 2".into()));
    }
    if cfg.sentences == 0 || matches!(cfg.word_sample, WordSample::Count(0)) {
        return Err(Error::Contract("sentence and word samples must be positive".into()));
    }
    let meta = source.meta();
    let index = build_index(meta, cfg.min_contexts, cfg.fold_case)?;
    let eligible = index.eligible_words().len();
    if eligible == 0 {
        return Err(Error::InsufficientData(format!(
            "no word occurs in at least {} distinct sentences",
            cfg.min_contexts
        )));
    }
    let words = sample_words(&index, cfg);
    let sentence_ids = {
        let mut rng = sampling::rng_for(cfg.seed, &[STREAM_SENTENCE_SAMPLE]);
        sampling::sorted_subset(&mut rng, meta.sentences.len(), cfg.sentences)
    };
    let offsets = meta.sentence_offsets();

    let mut layers = Vec::with_capacity(meta.layer_count);
    let mut per_word: Vec<Vec<WordLayerRaw>> = (0..words.len()).map(|_| Vec::new()).collect();
    for layer in 0..meta.layer_count {
        let cos_base = cosine_baseline(source, &index, layer, cfg.samples, cfg.seed)?;
        let mev_base = mev_baseline(source, &index, layer, cfg.samples, cfg.seed)?;

        let raw: Vec<WordLayerRaw> = words
            .par_iter()
            .map(|&w| {
                let m = occurrence_matrix::<f64, S>(w, layer, &index, source, cfg.cap, cfg.seed)?;
                Ok(WordLayerRaw {
                    selfsim: metrics::self_similarity(&m)?,
                    mev: metrics::mev(&m)?.mev,
                })
            })
            .collect::<Result<_>>()?;

        let dim = meta.dims[layer];
        let intrasims: Vec<f64> = sentence_ids
            .par_iter()
            .map(|&sid| {
                let (start, end) = (offsets[sid], offsets[sid + 1]);
                let mut buf = vec![0.0f32; (end - start) * dim];
                source.read_rows_into(layer, start, &mut buf)?;
                let vectors: Vec<Vec<f64>> = buf
                    .chunks_exact(dim)
                    .map(|r| r.iter().map(|&x| f64::from(x)).collect())
                    .collect();
                metrics::intra_sentence_similarity(&vectors).map_err(|e| match e {
                    Error::DegenerateSentence { .. } => Error::DegenerateSentence { sentence_id: sid },
                    other => other,
                })
            })
            .collect::<Result<_>>()?;

        let selfsim = adjust(mean(raw.iter().map(|r| r.selfsim)), BaselineKind::Cosine, &cos_base)?;
        let intrasim = adjust(mean(intrasims.iter().copied()), BaselineKind::Cosine, &cos_base)?;
        let mev = adjust(mean(raw.iter().map(|r| r.mev)), BaselineKind::Mev, &mev_base)?;
        layers.push(LayerReport {
            layer,
            cosine_baseline: cos_base.value,
            mev_baseline: mev_base.value,
            mean_selfsim_raw: selfsim.raw,
            mean_selfsim_adjusted: selfsim.adjusted,
            mean_intrasim_raw: intrasim.raw,
            mean_intrasim_adjusted: intrasim.adjusted,
            mean_mev_raw: mev.raw,
            mean_mev_adjusted: mev.adjusted,
            n_words: words.len(),
            n_sentences: sentence_ids.len(),
            seed: cfg.seed,
            min_contexts: cfg.min_contexts,
            cap: cfg.cap,
            baselines: [cos_base, mev_base],
        });
        for (slot, r) in per_word.iter_mut().zip(raw) {
            slot.push(r);
        }
    }

    let mut reports: Vec<WordReport> = words
        .iter()
        .zip(per_word)
        .map(|(&w, raw)| {
            let entry = index.get(w).expect("sampled words are indexed");
            let scores: Vec<WordLayerScores> = raw
                .iter()
                .zip(&layers)
                .map(|(r, l)| WordLayerScores {
                    layer: l.layer,
                    selfsim_raw: r.selfsim,
                    selfsim_adjusted: r.selfsim - l.cosine_baseline,
                    mev_raw: r.mev,
                    mev_adjusted: r.mev - l.mev_baseline,
                })
                .collect();
            WordReport {
                word: w.to_string(),
                occurrences: entry.occurrences.len(),
                unique_contexts: entry.unique_contexts,
                mean_selfsim_adjusted: mean(scores.iter().map(|s| s.selfsim_adjusted)),
                layers: scores,
            }
        })
        .collect();
    reports.sort_by(|a, b| {
        b.mean_selfsim_adjusted
            .total_cmp(&a.mean_selfsim_adjusted)
            .then_with(|| a.word.cmp(&b.word))
    });
    let top_words: Vec<WordReport> = reports.iter().take(RANKED_WORDS).cloned().collect();
    let bottom_words: Vec<WordReport> = reports.iter().rev().take(RANKED_WORDS).cloned().collect();

    Ok(AnalysisReport {
        format_version: REPORT_FORMAT_VERSION,
        model_name: meta.model_name.clone(),
        layer_count: meta.layer_count,
        total_tokens: meta.total_tokens(),
        total_sentences: meta.sentences.len(),
        eligible_words: eligible,
        config: cfg.clone(),
        context_rule: CONTEXT_RULE.into(),
        baseline_pair_rule: BASELINE_PAIR_RULE.into(),
        mev_convention: MEV_CONVENTION.into(),
        layers,
        top_words,
        bottom_words,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plot series: `layer,metric,raw,baseline,adjusted`, one row per layer
    /// and measure. Baseline rows carry the baseline as `raw` against 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,metric,raw,baseline,adjusted\n");
        for l in &self.layers {
            let rows = [
                ("cosine_baseline", l.cosine_baseline, 0.0, l.cosine_baseline),
                ("mev_baseline", l.mev_baseline, 0.0, l.mev_baseline),
                (
                    "selfsim",
                    l.mean_selfsim_raw,
                    l.cosine_baseline,
                    l.mean_selfsim_adjusted,
                ),
                (
                    "intrasim",
                    l.mean_intrasim_raw,
                    l.cosine_baseline,
                    l.mean_intrasim_adjusted,
                ),
                ("mev", l.mean_mev_raw, l.mev_baseline, l.mean_mev_adjusted),
            ];
            for (metric, raw, baseline, adjusted) in rows {
                writeln!(out, "{},{metric},{raw},{baseline},{adjusted}", l.layer).unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthKind, SynthSpec};

    fn small_cfg() -> AnalyzeConfig {
        AnalyzeConfig {
            samples: 200,
            sentences: 50,
            word_sample: WordSample::Count(30),
            ..AnalyzeConfig::default()
        }
    }

    #[test]
    fn static_dump_has_unit_self_similarity() {
        let spec = SynthSpec {
            sentences: 200,
            vocab: 40,
            d: 16,
            layers: 2,
            ..SynthSpec::new(SynthKind::Static)
        };
        let report = analyze(&generate(&spec).unwrap(), &small_cfg()).unwrap();
        for l in &report.layers {
            assert!((l.mean_selfsim_raw - 1.0).abs() < 1e-12, "{}", l.mean_selfsim_raw);
            assert!((l.mean_mev_raw - 1.0).abs() < 1e-12);
            assert_eq!(l.mean_selfsim_adjusted, l.mean_selfsim_raw - l.cosine_baseline);
        }
        assert_eq!(report.layers[0].n_words, 30);
    }

    #[test]
    fn no_eligible_words() {
        let spec = SynthSpec {
            sentences: 3,
            vocab: 40,
            d: 4,
            ..SynthSpec::new(SynthKind::Static)
        };
        let err = analyze(&generate(&spec).unwrap(), &small_cfg()).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)), "{err}");
    }

    #[test]
    fn csv_has_five_rows_per_layer() {
        let spec = SynthSpec {
            sentences: 100,
            vocab: 20,
            d: 8,
            layers: 3,
            ..SynthSpec::new(SynthKind::Isotropic)
        };
        let report = analyze(&generate(&spec).unwrap(), &small_cfg()).unwrap();
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 1 + 5 * 3);
        assert!(csv.lines().nth(3).unwrap().starts_with("0,selfsim,"));
    }

    #[test]
    fn word_sample_parsing() {
        assert_eq!("all".parse::<WordSample>().unwrap(), WordSample::All);
        assert_eq!("12".parse::<WordSample>().unwrap(), WordSample::Count(12));
        assert!("x".parse::<WordSample>().is_err());
    }

    #[test]
    fn rankings_are_ordered() {
        let spec = SynthSpec {
            sentences: 300,
            vocab: 60,
            d: 16,
            ..SynthSpec::new(SynthKind::ToyContextual)
        };
        let cfg = AnalyzeConfig {
            word_sample: WordSample::All,
            ..small_cfg()
        };
        let report = analyze(&generate(&spec).unwrap(), &cfg).unwrap();
        let keys: Vec<f64> = report.top_words.iter().map(|w| w.mean_selfsim_adjusted).collect();
        assert!(keys.windows(2).all(|w| w[0] >= w[1]));
        let bottom: Vec<f64> = report.bottom_words.iter().map(|w| w.mean_selfsim_adjusted).collect();
        assert!(bottom.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(report.top_words.len(), RANKED_WORDS);
        assert_eq!(report.top_words[0].layers.len(), 5);
    }
}

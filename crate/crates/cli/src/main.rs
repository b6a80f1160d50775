use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxgeom::analysis::{analyze, AnalyzeConfig, WordSample};
use ctxgeom::bench::{self, BenchResult, DEFAULT_RESTARTS};
use ctxgeom::distill::{distill_table, write_table};
use ctxgeom::store::{build_index, load_dump, LayerSource};
use ctxgeom::synth::{generate_to_dir, SynthKind, SynthSpec};
use ctxgeom::{Error, ErrorCategory, StaticEmbeddingTable64};

/// Geometry of contextualized word representations: anisotropy baselines,
/// self-similarity, intra-sentence similarity, maximum explainable variance,
/// and principal-component static embeddings.
#[derive(Parser)]
#[command(name = "ctxgeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-layer contextuality report for an embedding dump.
    Analyze(AnalyzeArgs),
    /// First-principal-component static embeddings for one layer.
    Distill(DistillArgs),
    /// Score a static embedding table on a benchmark dataset.
    Bench(BenchArgs),
    /// Write a synthetic embedding dump.
    Synth(SynthArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Dump directory (meta.json plus layer_<l>.bin files).
    #[arg(long)]
    dump: PathBuf,
    /// Minimum number of distinct sentences a word must occur in.
    #[arg(long, default_value_t = 5)]
    min_contexts: usize,
    /// Occurrence pairs (cosine) and occurrences (MEV) drawn per baseline.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Sentences sampled for intra-sentence similarity.
    #[arg(long, default_value_t = 500)]
    sentences: usize,
    /// Number of eligible words to sample, or `all`.
    #[arg(long, default_value = "1000")]
    word_sample: WordSample,
    /// Maximum occurrences per word.
    #[arg(long, default_value_t = 1000)]
    cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the layer,metric,raw,baseline,adjusted series here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Lowercase tokens before grouping them into words.
    #[arg(long)]
    fold_case: bool,
}

#[derive(Args)]
struct DistillArgs {
    #[arg(long)]
    dump: PathBuf,
    #[arg(long)]
    layer: usize,
    #[arg(long, default_value_t = 5)]
    min_contexts: usize,
    #[arg(long, default_value_t = 1000)]
    cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output text file, one `word c1 ... cd` line per word.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    fold_case: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Similarity,
    Analogy,
    Categorization,
}

#[derive(Args)]
struct BenchArgs {
    /// Static embedding text file, with or without an `N d` header.
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, value_enum)]
    task: Task,
    /// Dataset: `w1<TAB>w2<TAB>score`, analogy quadruples, or `word<TAB>category`.
    #[arg(long)]
    data: PathBuf,
    /// Seed for k-means initialization (categorization).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// JSON result path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// isotropic, cone, static or toy_contextual.
    #[arg(long)]
    kind: SynthKind,
    /// Output dump directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 64)]
    d: usize,
    #[arg(long, default_value_t = 1000)]
    sentences: usize,
    #[arg(long, default_value_t = 10)]
    sentence_length: usize,
    #[arg(long, default_value_t = 200)]
    vocab: usize,
    /// Layer count (ignored by toy_contextual, which has one layer per lambda).
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// Shared-mean norm for cone, mean offset for toy_contextual.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Comma-separated per-layer mixing weights for toy_contextual.
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8")]
    lambdas: Vec<f64>,
    /// Zipf exponent for token frequencies (uniform when omitted).
    #[arg(long)]
    zipf: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn write_file(path: &Path, contents: &str) -> ctxgeom::Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn run_analyze(a: AnalyzeArgs) -> ctxgeom::Result<()> {
    let dump = load_dump(&a.dump)?;
    let cfg = AnalyzeConfig {
        min_contexts: a.min_contexts,
        samples: a.samples,
        sentences: a.sentences,
        word_sample: a.word_sample,
        cap: a.cap,
        seed: a.seed,
        fold_case: a.fold_case,
    };
    let report = analyze(&dump, &cfg)?;
    write_file(&a.out, &report.to_json())?;
    if let Some(csv) = &a.csv {
        write_file(csv, &report.to_csv())?;
    }
    Ok(())
}

fn run_distill(a: DistillArgs) -> ctxgeom::Result<()> {
    let dump = load_dump(&a.dump)?;
    let meta = dump.meta();
    if a.layer >= meta.layer_count {
        return Err(Error::LayerOutOfRange {
            layer: a.layer,
            layer_count: meta.layer_count,
        });
    }
    let index = build_index(meta, a.min_contexts, a.fold_case)?;
    let outcome = distill_table::<f64, _>(&index, &dump, a.layer, a.cap, a.seed)?;
    if !outcome.ambiguous.is_empty() {
        eprintln!(
            "warning: {} word(s) have a repeated leading singular value; their component is not unique: {}",
            outcome.ambiguous.len(),
            outcome.ambiguous.join(" ")
        );
    }
    write_table(&outcome.table, &a.out)
}

fn run_bench(a: BenchArgs) -> ctxgeom::Result<()> {
    let table: StaticEmbeddingTable64 = ctxgeom::distill::read_table(&a.vectors)?;
    let result: BenchResult = match a.task {
        Task::Similarity => bench::eval_similarity(&bench::load_similarity_tsv(&a.data)?, &table)?,
        Task::Analogy => bench::eval_analogy(&bench::load_analogy_txt(&a.data)?, &table)?,
        Task::Categorization => {
            let ds = bench::load_categorization_tsv(&a.data)?;
            bench::eval_categorization(&ds, &table, a.restarts, a.seed)?
        }
    };
    let mut row = serde_json::to_string(&result).map_err(|e| Error::Format(e.to_string()))?;
    row.push('\n');
    write_file(&a.out, &row)
}

fn run_synth(a: SynthArgs) -> ctxgeom::Result<()> {
    let spec = SynthSpec {
        kind: a.kind,
        d: a.d,
        sentences: a.sentences,
        sentence_length: a.sentence_length,
        vocab: a.vocab,
        layers: a.layers,
        mu: a.mu,
        lambdas: a.lambdas,
        zipf: a.zipf,
        seed: a.seed,
    };
    generate_to_dir(&spec, &a.out).map(|_| ())
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 1,
        ErrorCategory::Format => 2,
        ErrorCategory::Insufficient => 3,
        ErrorCategory::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Distill(a) => run_distill(a),
        Command::Bench(a) => run_bench(a),
        Command::Synth(a) => run_synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}

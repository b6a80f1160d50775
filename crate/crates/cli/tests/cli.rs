use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ctxgeom::store::{load_dump, LayerSource};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctxgeom"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, kind: &str, extra: &[&str]) {
    let mut args = vec![
        "synth",
        "--kind",
        kind,
        "--out",
        p(dir),
        "--sentences",
        "300",
        "--vocab",
        "40",
        "--d",
        "16",
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("analyze"));
    assert_eq!(code(&run(&["bench", "--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["analyze"])), 1);
    assert_eq!(code(&run(&["synth", "--kind", "spherical", "--out", "x"])), 1);
    assert_eq!(
        code(&run(&["analyze", "--dump", "x", "--out", "y", "--word-sample", "many"])),
        1
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad");
    let out = run(&[
        "synth",
        "--kind",
        "toy_contextual",
        "--out",
        p(&bad),
        "--lambdas",
        "0.5,0.2",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn static_dump_analysis_has_unit_self_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    synth(&dump, "static", &["--layers", "3"]);
    let report = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let out = run(&[
        "analyze",
        "--dump",
        p(&dump),
        "--out",
        p(&report),
        "--csv",
        p(&csv),
        "--seed",
        "4",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&report);
    let layers = v["layers"].as_array().unwrap();
    assert_eq!(layers.len(), 3);
    for l in layers {
        assert!((l["mean_selfsim_raw"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!((l["mean_mev_raw"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(l["seed"], 4);
    }
    let csv = fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("layer,metric,raw,baseline,adjusted\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
}

#[test]
fn analyze_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    synth(&dump, "toy_contextual", &["--mu", "0.3"]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let r = run(&[
            "analyze",
            "--dump",
            p(&dump),
            "--out",
            p(out),
            "--seed",
            "9",
            "--samples",
            "200",
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = json(&a);
    assert!(!v["top_words"].as_array().unwrap().is_empty());
    assert_eq!(v["config"]["samples"], 200);
}

#[test]
fn analyze_without_eligible_words_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    synth(&dump, "isotropic", &[]);
    let out = run(&[
        "analyze",
        "--dump",
        p(&dump),
        "--min-contexts",
        "100000",
        "--out",
        p(&dir.path().join("r.json")),
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("100000"));
}

#[test]
fn damaged_dump_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    synth(&dump, "isotropic", &[]);
    let layer = dump.join("layer_0.bin");
    let bytes = fs::read(&layer).unwrap();
    fs::write(&layer, &bytes[..bytes.len() - 4]).unwrap();
    let out = run(&["analyze", "--dump", p(&dump), "--out", p(&dir.path().join("r.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn distill_static_dump_recovers_word_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let dump_dir = dir.path().join("dump");
    synth(&dump_dir, "static", &["--layers", "2"]);
    let vectors = dir.path().join("vectors.txt");
    let out = run(&["distill", "--dump", p(&dump_dir), "--layer", "1", "--out", p(&vectors)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let dump = load_dump(&dump_dir).unwrap();
    let text = fs::read_to_string(&vectors).unwrap();
    let mut lines = text.lines();
    let header: Vec<usize> = lines.next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(header[1], 16);
    let mut seen = 0;
    for line in lines {
        let mut fields = line.split(' ');
        let word = fields.next().unwrap();
        let got: Vec<f64> = fields.map(|x| x.parse().unwrap()).collect();
        let row = dump
            .meta()
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter())
            .position(|t| t == word)
            .unwrap();
        let v: Vec<f64> = dump.row(1, row).unwrap().iter().map(|&x| f64::from(x)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (g, x) in got.iter().zip(&v) {
            assert!((g - x / norm).abs() < 1e-12, "{word}: {g} vs {}", x / norm);
        }
        seen += 1;
    }
    assert_eq!(seen, header[0]);
}

#[test]
fn distill_rerun_is_identical_and_errors_map_to_codes() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    synth(&dump, "toy_contextual", &[]);
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let r = run(&[
            "distill",
            "--dump",
            p(&dump),
            "--layer",
            "3",
            "--cap",
            "20",
            "--seed",
            "5",
            "--out",
            p(out),
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let unwritable = dir.path().join("no/such/dir/v.txt");
    assert_eq!(
        code(&run(&[
            "distill",
            "--dump",
            p(&dump),
            "--layer",
            "0",
            "--out",
            p(&unwritable)
        ])),
        4
    );
    assert_eq!(
        code(&run(&["distill", "--dump", p(&dump), "--layer", "9", "--out", p(&a)])),
        1
    );
}

fn bench(task: &str, data: &str, out: &Path) -> Output {
    run(&[
        "bench",
        "--vectors",
        &fixture("vectors.txt"),
        "--task",
        task,
        "--data",
        data,
        "--out",
        p(out),
    ])
}

#[test]
fn bench_fixtures_score_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("row.json");
    let cases = [
        ("similarity", "similarity.tsv", 1.0),
        ("similarity", "similarity_reversed.tsv", -1.0),
        ("analogy", "analogy.txt", 1.0),
        ("categorization", "categorization.tsv", 1.0),
    ];
    for (task, data, score) in cases {
        let r = bench(task, &fixture(data), &out);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        let v = json(&out);
        assert_eq!(v["task"], task);
        assert_eq!(v["score"].as_f64().unwrap(), score, "{task} on {data}");
        assert_eq!(v["coverage"].as_f64().unwrap(), 1.0);
        assert!(v["n_evaluated"].as_u64().unwrap() > 0);
        assert!(v.get("seed").is_some());
    }
}

#[test]
fn bench_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("row.json");

    let malformed = dir.path().join("bad.txt");
    fs::write(&malformed, "east north south\n").unwrap();
    let r = bench("analogy", p(&malformed), &out);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains(":1:"));

    let oov = dir.path().join("oov.tsv");
    fs::write(&oov, "zebra\tlion\t3\ncat\tunicorn\t4\n").unwrap();
    assert_eq!(code(&bench("similarity", p(&oov), &out)), 3);

    let missing = dir.path().join("missing.tsv");
    assert_eq!(code(&bench("similarity", p(&missing), &out)), 4);
}

#[test]
fn full_pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = Vec::new();
    for round in 0..2 {
        let base = dir.path().join(format!("r{round}"));
        fs::create_dir(&base).unwrap();
        let dump = base.join("dump");
        synth(&dump, "toy_contextual", &["--seed", "21", "--mu", "0.2"]);
        let report = base.join("report.json");
        assert_eq!(
            code(&run(&[
                "analyze",
                "--dump",
                p(&dump),
                "--seed",
                "21",
                "--out",
                p(&report)
            ])),
            0
        );
        let vectors = base.join("vectors.txt");
        assert_eq!(
            code(&run(&[
                "distill",
                "--dump",
                p(&dump),
                "--layer",
                "2",
                "--seed",
                "21",
                "--out",
                p(&vectors)
            ])),
            0
        );
        let cats = base.join("cats.tsv");
        let text = fs::read_to_string(&vectors).unwrap();
        let words: Vec<&str> = text.lines().skip(1).map(|l| l.split(' ').next().unwrap()).collect();
        let listing: String = words
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{w}\tc{}\n", i % 3))
            .collect();
        fs::write(&cats, listing).unwrap();
        let row = base.join("row.json");
        let r = run(&[
            "bench",
            "--vectors",
            p(&vectors),
            "--task",
            "categorization",
            "--data",
            p(&cats),
            "--seed",
            "21",
            "--out",
            p(&row),
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        rows.push([
            fs::read(&report).unwrap(),
            fs::read(&vectors).unwrap(),
            fs::read(&row).unwrap(),
        ]);
    }
    assert_eq!(rows[0], rows[1]);
}

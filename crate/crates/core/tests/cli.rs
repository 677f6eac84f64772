use std::path::{Path, PathBuf};

use solvency::balance::{resample, smote};
use solvency::datagen::{generate, GeneratorSpec};
use solvency::dataset::{load_csv_with, write_csv, CsvOptions, Dataset};
use solvency::eval::cross_validate;
use solvency::tree::{grow, parse, render, serialize, LearnerParams};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("solvency").chain(args.iter().copied());
    let code = solvency::cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load(p: &Path) -> Dataset {
    let opts = CsvOptions {
        allow_duplicates: true,
        ..CsvOptions::default()
    };
    load_csv_with(std::fs::File::open(p).unwrap(), opts).unwrap()
}

fn generated(dir: &Path, seed: &str, counts: &str) -> PathBuf {
    let path = dir.join(format!("gen-{seed}.csv"));
    ok(&["--seed", seed, "generate", "--counts", counts, "-o", s(&path)]);
    path
}

#[test]
fn generate_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = generated(dir.path(), "5", "44,13,16,543");
    let lib = generate(&GeneratorSpec {
        seed: 5,
        ..GeneratorSpec::default()
    })
    .unwrap();
    let mut expected = Vec::new();
    write_csv(&lib, &mut expected).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), expected);
    assert_eq!(load(&path).class_distribution().unwrap(), [44, 13, 16, 543]);
}

#[test]
fn smote_stage_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "9", "45,13,17,541");
    let out = dir.path().join("smote.csv");
    ok(&["--seed", "3", "balance", "--mode", "smote", "--targets", "540,533,522,541", "-i", s(&input), "-o", s(&out)]);
    let got = load(&out);
    assert_eq!(got.len(), 2136);
    assert_eq!(got.class_distribution().unwrap(), [540, 533, 522, 541]);
    let lib = smote(&load(&input), [540, 533, 522, 541], 5, 3).unwrap();
    assert_eq!(got, lib);
}

#[test]
fn resample_stage_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "9", "44,13,16,543");
    let out = dir.path().join("res.csv");
    ok(&["--seed", "4", "balance", "--mode", "resample", "--bias", "1", "-i", s(&input), "-o", s(&out)]);
    assert_eq!(load(&out), resample(&load(&input), 1.0, 100.0, 4).unwrap());
}

#[test]
fn train_render_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "2", "44,13,16,543");
    let model_path = dir.path().join("m.tree");
    ok(&["train", "-i", s(&input), "-o", s(&model_path)]);
    let text = std::fs::read_to_string(&model_path).unwrap();
    let model = parse(&text).unwrap();
    let lib = grow(&load(&input), &LearnerParams::default()).unwrap();
    assert_eq!(model, lib);
    assert_eq!(text, serialize(&lib));

    assert_eq!(ok(&["render-tree", "-m", s(&model_path)]), render(&lib));

    let one = dir.path().join("one.csv");
    let rows: Vec<String> = std::fs::read_to_string(&input).unwrap().lines().take(2).map(String::from).collect();
    std::fs::write(&one, rows.join("\n") + "\n").unwrap();
    let out = ok(&["predict", "-m", s(&model_path), "-i", s(&one)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    let fields: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(fields.len(), 7);
    assert_eq!(fields[0], rows[1].split(',').next().unwrap());
    assert!(["insolvency", "weak", "moderate", "strong"].contains(&fields[2]));
    let p: f64 = fields[3..].iter().map(|f| f.parse::<f64>().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-5);
    assert!(fields[3..].iter().all(|f| f.split('.').nth(1).map(str::len) == Some(6)));
}

#[test]
fn cross_validate_report_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "6", "44,13,16,543");
    let report = dir.path().join("report.txt");
    let summary = dir.path().join("summary.txt");
    ok(&[
        "--seed", "6", "cross-validate", "--balance", "resample", "--bias", "1", "-i", s(&input), "-o", s(&report),
        "--summary", s(&summary),
    ]);
    let balance = solvency::balance::BalanceTargets::resample(1.0, 100.0, 6);
    let lib = cross_validate(&load(&input), 10, &LearnerParams::default(), Some(&balance), 6).unwrap();
    assert_eq!(std::fs::read_to_string(&report).unwrap(), lib.render_table());
    assert_eq!(std::fs::read_to_string(&summary).unwrap(), lib.render_summary());
}

#[test]
fn evaluate_on_held_out_set() {
    let dir = tempfile::tempdir().unwrap();
    let train = generated(dir.path(), "1", "44,13,16,543");
    let test = generated(dir.path(), "2", "10,10,10,10");
    let model = dir.path().join("m.tree");
    ok(&["train", "-i", s(&train), "-o", s(&model)]);
    let out = ok(&["evaluate", "-m", s(&model), "-i", s(&test)]);
    assert!(out.starts_with("Classification"));
    assert!(out.contains("Correctly classified"));
}

#[test]
fn select_features_and_label() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "7", "44,13,16,543");
    let projected = dir.path().join("sel.csv");
    let out = ok(&["select-features", "-i", s(&input), "-o", s(&projected)]);
    let mut lines = out.lines();
    let mut names: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(lines.next().unwrap().starts_with("merit="));
    names.sort_by_key(|n| n[1..].parse::<usize>().unwrap());
    assert_eq!(load(&projected).schema(), names.as_slice());

    let raw = dir.path().join("raw.csv");
    let text = std::fs::read_to_string(&input).unwrap();
    let stripped: Vec<String> = text
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect();
    std::fs::write(&raw, stripped.join("\n") + "\n").unwrap();
    let labeled = dir.path().join("labeled.csv");
    ok(&["label", "-i", s(&raw), "-o", s(&labeled)]);
    assert_eq!(load(&labeled).class_distribution().unwrap(), [44, 13, 16, 543]);
}

#[test]
fn identical_argv_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "8", "44,13,16,543");
    let outputs: Vec<String> = (0..2)
        .map(|_| {
            ok(&["--seed", "8", "cross-validate", "--balance", "smote", "--targets", "100,100,100,543", "-i", s(&input)])
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    let before = std::fs::read(&input).unwrap();
    generated(dir.path(), "8", "44,13,16,543");
    assert_eq!(std::fs::read(&input).unwrap(), before);
}

#[test]
fn config_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let input = generated(dir.path(), "3", "44,13,16,543");
    let cfg = dir.path().join("p.toml");
    std::fs::write(&cfg, "seed = 3\nfolds = 5\n\n[learner]\nconfidence_factor = 0.1\n").unwrap();
    let from_cfg = ok(&["--config", s(&cfg), "cross-validate", "-i", s(&input)]);
    let explicit = ok(&["--seed", "3", "cross-validate", "--folds", "5", "--cf", "0.1", "-i", s(&input)]);
    assert_eq!(from_cfg, explicit);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["train", "--cf", "abc"]).code, 2);

    let missing = run(&["train", "-i", "/nonexistent/input.csv"]);
    assert_eq!(missing.code, 2);
    assert!(missing.stderr.contains("Usage"), "{}", missing.stderr);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "company_id,year,car,V1\nA,2001,150,oops\n").unwrap();
    let r = run(&["train", "-i", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 2") || r.stderr.contains("row 2"), "{}", r.stderr);

    let input = generated(dir.path(), "1", "1,13,16,40");
    let r = run(&["balance", "--mode", "smote", "--targets", "5,13,16,40", "-i", s(&input)]);
    assert_eq!(r.code, 1);

    let model = dir.path().join("junk.tree");
    std::fs::write(&model, "not a model\n").unwrap();
    assert_eq!(run(&["render-tree", "-m", s(&model)]).code, 1);
}

//! Black-box tests of the corpsim binary: exit codes, stdout JSON,
//! and determinism of written artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corpsim"))
}

fn run(args: &[&str]) -> Output {
    corpsim().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad stdout json: {e}\n{text}"))
}

fn stderr_error_kind(output: &Output) -> String {
    let text = String::from_utf8_lossy(&output.stderr);
    let line = text.lines().last().unwrap_or_default();
    let value: serde_json::Value =
        serde_json::from_str(line).unwrap_or_else(|e| panic!("bad stderr json: {e}\n{text}"));
    value["error"]["kind"].as_str().unwrap_or_default().to_string()
}

/// A deterministic letters-only corpus with a skewed token profile.
fn write_corpus(path: &Path, tokens: usize, salt: u64) -> PathBuf {
    let mut words = Vec::with_capacity(tokens);
    let mut state = salt.wrapping_add(0x9E37_79B9_7F4A_7C15);
    for _ in 0..tokens {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        // Zipf-ish: low ids much more common than high ids.
        let r = (state >> 33) as f64 / (1u64 << 31) as f64;
        let id = ((1.0 - r).powi(3) * 400.0) as u64;
        let mut word = String::new();
        let mut v = id;
        loop {
            word.push(char::from(b'a' + (v % 26) as u8));
            v /= 26;
            if v == 0 {
                break;
            }
        }
        words.push(word);
    }
    let text: Vec<String> = words.chunks(40).map(|c| c.join(" ")).collect();
    std::fs::write(path, text.join("\n")).unwrap();
    path.to_path_buf()
}

fn mini_config(dir: &Path, seed: u64) -> PathBuf {
    let config = serde_json::json!({
        "language": {"code": "syn", "default_feature": "w1", "spaceless": false},
        "registers": [
            {"name": "A", "synthetic": {"profile_seed": 0, "exclusive_types": 50, "exclusive_permil": 300, "tokens": 9000, "doc_tokens": 200, "shared_types": 800}},
            {"name": "B", "synthetic": {"profile_seed": 1, "exclusive_types": 50, "exclusive_permil": 300, "tokens": 9000, "doc_tokens": 200, "shared_types": 800}},
            {"name": "C", "synthetic": {"profile_seed": 2, "exclusive_types": 50, "exclusive_permil": 300, "tokens": 9000, "doc_tokens": 200, "shared_types": 800}}
        ],
        "sample_size_words": 1000,
        "n_features": 300,
        "feature_type": "w1",
        "pairs_per_condition": 15,
        "seed": seed
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn compare_identical_files_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&dir.path().join("a.txt"), 3000, 1);
    let output = run(&[
        "compare",
        corpus.to_str().unwrap(),
        corpus.to_str().unwrap(),
        "--language",
        "eng",
        "--select-from",
        corpus.to_str().unwrap(),
        "--feature-type",
        "w1",
        "--n-features",
        "100",
        "--sample-size",
        "1000",
        "--seed",
        "3",
    ]);
    assert!(output.status.success(), "{output:?}");
    let value = stdout_json(&output);
    assert_eq!(value["score"], 1.0);
    assert_eq!(value["measure"], "spearman");
    assert_eq!(value["n_features"], 100);
    assert_eq!(value["sample_size"], 1000);
}

#[test]
fn compare_is_symmetric_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_corpus(&dir.path().join("a.txt"), 3000, 1);
    let b = write_corpus(&dir.path().join("b.txt"), 3000, 2);
    let sel = write_corpus(&dir.path().join("sel.txt"), 3000, 3);
    let base = [
        "--language",
        "eng",
        "--select-from",
        sel.to_str().unwrap(),
        "--feature-type",
        "w1",
        "--n-features",
        "100",
        "--sample-size",
        "1000",
        "--seed",
        "9",
    ];
    let mut ab = vec!["compare", a.to_str().unwrap(), b.to_str().unwrap()];
    ab.extend_from_slice(&base);
    let mut ba = vec!["compare", b.to_str().unwrap(), a.to_str().unwrap()];
    ba.extend_from_slice(&base);
    let out_ab = run(&ab);
    let out_ba = run(&ba);
    assert!(out_ab.status.success());
    assert_eq!(stdout_json(&out_ab)["score"], stdout_json(&out_ba)["score"]);
}

#[test]
fn compare_short_corpus_exits_2_with_machine_readable_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&dir.path().join("a.txt"), 500, 1);
    let output = run(&[
        "compare",
        corpus.to_str().unwrap(),
        corpus.to_str().unwrap(),
        "--language",
        "eng",
        "--select-from",
        corpus.to_str().unwrap(),
        "--feature-type",
        "w1",
        "--n-features",
        "50",
        "--sample-size",
        "10000",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(stderr_error_kind(&output), "InsufficientData");
}

#[test]
fn compare_warns_below_recommended_sample_size() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&dir.path().join("a.txt"), 3000, 1);
    let output = run(&[
        "compare",
        corpus.to_str().unwrap(),
        corpus.to_str().unwrap(),
        "--language",
        "eng",
        "--select-from",
        corpus.to_str().unwrap(),
        "--feature-type",
        "w1",
        "--n-features",
        "100",
        "--sample-size",
        "1000",
    ]);
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("below the recommended minimum"), "{stderr}");
}

#[test]
fn evaluate_writes_report_and_prints_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let config = mini_config(dir.path(), 5);
    let report_path = dir.path().join("report.json");
    let dist_path = dir.path().join("dist.csv");
    let output = run(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--export-dist",
        dist_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("overall accuracy:"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["overall_accuracy"].as_f64().unwrap() >= 0.9);
    let csv = std::fs::read_to_string(&dist_path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 90);
    assert!(csv.starts_with("condition,register_a,register_b,score,domain_tag\n"));
}

#[test]
fn evaluate_is_byte_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let config = mini_config(dir.path(), 6);
    let mut reports = Vec::new();
    for (name, jobs) in [("r1.json", "1"), ("r8.json", "8")] {
        let path = dir.path().join(name);
        let output = run(&[
            "--jobs",
            jobs,
            "evaluate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
        reports.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn evaluate_missing_config_field_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    // Second register has neither corpus paths nor a generator.
    std::fs::write(
        &config,
        serde_json::json!({
            "language": {"code": "syn", "default_feature": "w1", "spaceless": false},
            "registers": [
                {"name": "A", "synthetic": {"profile_seed": 0, "exclusive_permil": 300, "tokens": 5000}},
                {"name": "B"}
            ],
            "sample_size_words": 1000,
            "seed": 1
        })
        .to_string(),
    )
    .unwrap();
    let output = run(&["evaluate", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("registers[1].train"), "{stderr}");
}

#[test]
fn evaluate_missing_corpus_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("missing.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "language": "eng",
            "registers": [
                {"name": "A", "train": "/nonexistent/a.txt", "test": "/nonexistent/a.txt"},
                {"name": "B", "train": "/nonexistent/b.txt", "test": "/nonexistent/b.txt"}
            ],
            "sample_size_words": 1000,
            "seed": 1
        })
        .to_string(),
    )
    .unwrap();
    let output = run(&["evaluate", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(stderr_error_kind(&output), "Io");
}

#[test]
fn unknown_flag_exits_1() {
    let output = run(&["compare", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn build_features_then_overlap_of_itself_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&dir.path().join("a.txt"), 4000, 4);
    let space = dir.path().join("space.json");
    let output = run(&[
        "build-features",
        corpus.to_str().unwrap(),
        "--language",
        "eng",
        "--feature-type",
        "c4",
        "--n-features",
        "200",
        "--out",
        space.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let overlap = run(&["overlap", space.to_str().unwrap(), space.to_str().unwrap()]);
    assert!(overlap.status.success());
    assert_eq!(stdout_json(&overlap)["overlap"], 1.0);
}

#[test]
fn sample_emits_jsonl_with_exact_word_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&dir.path().join("a.txt"), 3500, 5);
    let output = run(&[
        "sample",
        corpus.to_str().unwrap(),
        "--language",
        "eng",
        "--register",
        "TW",
        "--size",
        "1000",
        "--seed",
        "2",
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["word_count"], 1000);
        assert_eq!(v["register"], "TW");
        assert_eq!(v["text"].as_str().unwrap().split_whitespace().count(), 1000);
    }
}

#[test]
fn calibrate_prints_both_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let config = mini_config(dir.path(), 7);
    let out = dir.path().join("threshold.json");
    let output = run(&[
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("T1 = ") && stdout.contains("T2 = "), "{stdout}");
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(value["threshold"]["method"], "T2");
    assert_eq!(value["threshold"]["measure"], "spearman");
}

#[test]
fn grid_writes_matrix_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = mini_config(dir.path(), 8);
    let out = dir.path().join("grid.json");
    let csv = dir.path().join("grid.csv");
    let output = run(&[
        "grid",
        "--config",
        config.to_str().unwrap(),
        "--sizes",
        "500,1000",
        "--feature-types",
        "w1,c3",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().count(), 5);
    assert!(csv_text.starts_with(
        "sample_size_words,feature_type,n_features,measure,overall_accuracy,error\n"
    ));
}

#[test]
fn crossval_reports_per_fold_accuracies() {
    let dir = tempfile::tempdir().unwrap();
    let config = mini_config(dir.path(), 9);
    let output = run(&[
        "crossval",
        "--config",
        config.to_str().unwrap(),
        "--folds",
        "3",
    ]);
    assert!(output.status.success(), "{output:?}");
    let value = stdout_json(&output);
    assert_eq!(value["folds"], 3);
    assert_eq!(value["accuracies"].as_array().unwrap().len(), 3);
}

#[test]
fn export_dist_round_trips_from_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = mini_config(dir.path(), 10);
    let report_path = dir.path().join("report.json");
    assert!(run(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ])
    .status
    .success());
    let csv_path = dir.path().join("dist.csv");
    let output = run(&[
        "export-dist",
        "--report",
        report_path.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 91);
}

#[test]
fn data_dir_flag_rebases_relative_config_paths() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(&dir.path().join("a.txt"), 2500, 1);
    write_corpus(&dir.path().join("b.txt"), 2500, 2);
    let config = dir.path().join("paths.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "language": "eng",
            "registers": [
                {"name": "A", "train": "a.txt", "test": "a.txt"},
                {"name": "B", "train": "b.txt", "test": "b.txt"}
            ],
            "sample_size_words": 500,
            "n_features": 100,
            "feature_type": "w1",
            "pairs_per_condition": 3,
            "seed": 1
        })
        .to_string(),
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let output = run(&[
        "--data-dir",
        dir.path().to_str().unwrap(),
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
}

#[test]
fn shipped_demo_configs_parse() {
    let demo_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo");
    for name in [
        "synthetic_three_registers.json",
        "synthetic_null.json",
        "synthetic_out_of_domain.json",
        "english_nondigital_registers.json",
    ] {
        let text = std::fs::read_to_string(demo_dir.join(name)).unwrap();
        corpsim::ExperimentConfig::from_json(&text)
            .unwrap_or_else(|e| panic!("demo config {name}: {e}"));
    }
}

use std::path::Path;
use std::process::{Command, Output};

use dyncurric::harness::RunLog;

const TINY: &str = r#"
seed = 3
max_phases = 2

[task]
kind = "copy"
train_size = 12
dev_size = 3
test_size = 3
min_len = 1
max_len = 4
vocab_size = 6

[model]
embed_dim = 8
ff_dim = 8
layers = 1
heads = 2
"#;

fn dyncurric(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyncurric"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn tiny_config(dir: &Path) -> String {
    let path = dir.join("tiny.toml");
    std::fs::write(&path, TINY).unwrap();
    path.display().to_string()
}

#[test]
fn score_prints_bleu_and_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("hyp"), "the cat is on the mat\na b c d e\n").unwrap();
    std::fs::write(dir.path().join("ref"), "the cat is on the mat\na b c d e\n").unwrap();
    let out = dyncurric(&["score", "--hyp", "hyp", "--ref", "ref"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("BLEU = 100.00"), "{}", text(&out.stdout));

    let out = dyncurric(&["score", "--hyp", "hyp", "--ref", "ref", "--json"], dir.path());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["bleu"].as_f64(), Some(100.0));
}

#[test]
fn score_rejects_mismatched_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("hyp"), "a\nb\n").unwrap();
    std::fs::write(dir.path().join("ref"), "a\n").unwrap();
    let out = dyncurric(&["score", "--hyp", "hyp", "--ref", "ref"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_a_readable_log_and_report_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = dyncurric(
        &["run", "--config", &config, "--metric", "length", "--schedule", "sqrt", "--log", "logs/run.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let log = RunLog::read(&dir.path().join("logs/run.jsonl")).unwrap();
    assert_eq!(log.run_id(), "length-sqrt-s3");
    assert_eq!(log.phases.len(), 2);
    assert!(log.final_record.is_some());

    let out = dyncurric(&["report", "logs/run.jsonl", "--out", "reports", "--bucket-edges", "1,3"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    for name in ["curves.csv", "curve_length-sqrt-s3.csv", "avg_loss.csv", "length_buckets.csv"] {
        assert!(dir.path().join("reports").join(name).is_file(), "{name}");
    }
}

#[test]
fn flag_overrides_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = dyncurric(
        &["run", "--config", &config, "--seed", "9", "--max-phases", "1", "--set", "optimizer.label_smoothing=0.0", "--log", "r.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let log = RunLog::read(&dir.path().join("r.jsonl")).unwrap();
    assert_eq!(log.header.config.seed, 9);
    assert_eq!(log.header.config.optimizer.label_smoothing, 0.0);
    assert_eq!(log.phases.len(), 1);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    for args in [
        vec!["run", "--config", &config, "--metric", "decline"],
        vec!["run", "--config", &config, "--set", "model.colour=3"],
        vec!["run", "--config", &config, "--metric", "decline", "--schedule", "dmc"],
        vec!["run", "--config", "missing.toml"],
    ] {
        let out = dyncurric(&args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", text(&out.stderr));
    }
}

#[test]
fn divergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = dyncurric(
        &[
            "run",
            "--config",
            &config,
            "--set",
            "optimizer.schedule.init_lr=1e300",
            "--set",
            "optimizer.schedule.peak_lr=1e300",
            "--log",
            "d.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("numerical divergence"));
}

#[test]
fn matrix_writes_table_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = dyncurric(
        &["matrix", "--config", &config, "--out", "m", "--methods", "Baseline,Length + Sqrt", "--bucket-edges", "2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("m/table.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(dir.path().join("m/logs/baseline-s3.jsonl").is_file());
    assert!(dir.path().join("m/length_buckets.csv").is_file());

    let out = dyncurric(&["matrix", "--config", &config, "--out", "m2", "--methods", "Nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

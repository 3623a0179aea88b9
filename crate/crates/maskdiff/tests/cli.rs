//! End-to-end checks of the command-line surface: generate, bench, config
//! files, trace capture, and scripted replay.

use std::path::Path;
use std::process::{Command, Output};

use maskdiff::metrics::RunReport;
use maskdiff::{PromptRecord, Suite};

fn maskdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output, context: &str) {
    assert!(
        out.status.success(),
        "{context} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_report(path: &Path) -> RunReport {
    let text = std::fs::read_to_string(path).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn generate_runs_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = maskdiff(&[
        "generate",
        "--prompt",
        "5,7,9",
        "--gen-len",
        "16",
        "--block-size",
        "8",
        "--threshold",
        "0.3",
        "--cache",
        "vicinity",
        "--prefix-look",
        "4",
        "--after-look",
        "4",
        "--seed",
        "7",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_success(&out, "generate");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("TPF"), "summary printed: {stdout}");

    let report = read_report(&report_path);
    assert_eq!(report.n, 1);
    assert!(report.sequences[0].forwards >= 1);
    assert_eq!(report.config.gen_len, 16);
}

#[test]
fn bench_aggregates_a_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite_path = dir.path().join("suite.json");
    let report_path = dir.path().join("report.json");
    Suite::new(vec![
        PromptRecord { id: "a".into(), prompt: vec![2, 3], reference: Some("ref".into()) },
        PromptRecord { id: "b".into(), prompt: vec![4, 5, 6], reference: None },
    ])
    .save(&suite_path)
    .unwrap();

    let out = maskdiff(&[
        "bench",
        "--suite",
        suite_path.to_str().unwrap(),
        "--gen-len",
        "8",
        "--block-size",
        "4",
        "--threshold",
        "0.2",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_success(&out, "bench");
    let report = read_report(&report_path);
    assert_eq!(report.n, 2);
    assert_eq!(report.failed, 0);
    assert_eq!(report.sequences[0].reference.as_deref(), Some("ref"));
    let mean = (report.sequences[0].tpf + report.sequences[1].tpf) / 2.0;
    assert!((report.aggregate.mean_tpf - mean).abs() < 1e-9);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    let report_path = dir.path().join("report.json");
    std::fs::write(
        &config_path,
        "gen-len = 8\nblock-size = 4\nthreshold = 0.2\ndecoder = \"credit\"\ncache = \"none\"\nsmooth = false\n",
    )
    .unwrap();

    let out = maskdiff(&[
        "generate",
        "--prompt",
        "2,3",
        "--config",
        config_path.to_str().unwrap(),
        "--block-size",
        "8",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_success(&out, "generate with config file");
    let report = read_report(&report_path);
    assert_eq!(report.config.gen_len, 8);
    // CLI flag wins over the file.
    assert_eq!(report.config.block_size, 8);
    assert_eq!(report.config.threshold, 0.2);
    // sched-target mirrors the threshold when not set explicitly.
    assert_eq!(report.config.sched_target, 0.2);

    let bad = maskdiff(&[
        "generate",
        "--prompt",
        "2,3",
        "--config",
        config_path.to_str().unwrap(),
        "--block-size",
        "3",
    ]);
    assert!(!bad.status.success(), "indivisible gen_len must fail");
}

#[test]
fn trace_capture_then_scripted_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    let trace_path = dir.path().join("trace.json");
    let report_a = dir.path().join("a.json");
    let report_b = dir.path().join("b.json");

    let common = [
        "--gen-len",
        "8",
        "--block-size",
        "4",
        "--threshold",
        "0.2",
        "--cache",
        "none",
        "--no-smooth",
        "--seed",
        "11",
    ];

    let mut args = vec!["generate", "--prompt", "2,3,4"];
    args.extend_from_slice(&common);
    args.extend_from_slice(&["--trace", trace_path.to_str().unwrap(), "--report", report_a.to_str().unwrap()]);
    let out = maskdiff(&args);
    assert_success(&out, "generate with trace capture");
    assert!(trace_path.exists());

    let scripted = format!("scripted:{}", trace_path.display());
    let mut args = vec!["generate", "--prompt", "2,3,4", "--model", &scripted];
    args.extend_from_slice(&common);
    args.extend_from_slice(&["--report", report_b.to_str().unwrap()]);
    let out = maskdiff(&args);
    assert_success(&out, "replay through scripted model");

    let a = read_report(&report_a);
    let b = read_report(&report_b);
    assert_eq!(a.sequences[0].forwards, b.sequences[0].forwards);
    assert_eq!(a.sequences[0].tokens_before_eos, b.sequences[0].tokens_before_eos);
    assert_eq!(a.sequences[0].tpf, b.sequences[0].tpf);
}

#[test]
fn fatal_errors_exit_nonzero() {
    let out = maskdiff(&["generate", "--prompt", "2,3", "--gen-len", "10", "--block-size", "4"]);
    assert!(!out.status.success());

    let out = maskdiff(&["bench", "--suite", "/nonexistent/suite.json"]);
    assert!(!out.status.success());

    let out = maskdiff(&["generate", "--prompt", "2,3", "--model", "scripted:/nonexistent.json"]);
    assert!(!out.status.success());
}

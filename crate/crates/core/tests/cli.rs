//! End-to-end tests of the `seqpipe` binary: exit codes, stderr
//! routing, and registry-backed commands, all through a real process.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn seqpipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqpipe"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

fn manifest_arg() -> String {
    fixtures().join("registry.toml").to_str().unwrap().to_string()
}

#[test]
fn success_exits_zero_and_matches_golden() {
    let output = seqpipe(&[
        "buckets", "--synthetic", "uniform:1:100:10000:42", "--num-buckets", "10",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(output.stderr.is_empty());
    let golden = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/buckets.txt"),
    )
    .unwrap();
    assert_eq!(stdout_of(&output), golden);
}

#[test]
fn usage_problems_exit_two() {
    // clap-level: unknown subcommand, unknown flag, out-of-range value.
    for args in [
        vec!["frobnicate"],
        vec!["buckets", "--synthetic", "uniform:1:9:10:1", "--no-such-flag"],
        vec!["buckets", "--synthetic", "uniform:1:9:10:1", "--num-buckets", "0"],
    ] {
        let output = seqpipe(&args);
        assert_eq!(output.status.code(), Some(2), "{args:?}");
    }
    // command-level: malformed spec, missing source, missing manifest,
    // unknown dataset name.
    for args in [
        vec!["info", "--synthetic", "poisson:1:2:3:4"],
        vec!["info"],
        vec!["info", "--dataset", "toy-pairs:train"],
        vec!["info", "--dataset", "no-such:train", "--manifest", &manifest_arg()],
    ] {
        let output = seqpipe(&args);
        assert_eq!(output.status.code(), Some(2), "{args:?}");
        assert!(stderr_of(&output).starts_with("error: "), "{args:?}");
        assert!(output.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn runtime_problems_exit_one() {
    // Missing manifest file.
    let output = seqpipe(&["info", "--dataset", "toy-pairs:train", "--manifest", "/no/such.toml"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).starts_with("error: "));

    // Pareto objectives missing on external seed-catalog records.
    let output = seqpipe(&["zoo", "pareto", "--task", "Image Classification"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("missing"));

    // Report path in a nonexistent directory; the file stays absent.
    let output = seqpipe(&[
        "bench", "--synthetic", "uniform:1:9:64:1", "--out", "/no/such/dir/report.json",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!Path::new("/no/such/dir/report.json").exists());
}

#[test]
fn fixture_datasets_load_through_the_registry() {
    let manifest = manifest_arg();
    let cases = [
        ("toy-pairs:train", "samples: 8", "schema: varseq, fixed"),
        ("toy-text:train", "samples: 5", "schema: varseq"),
        ("toy-synth:train", "samples: 64", "schema: varseq"),
    ];
    for (name, samples, schema) in cases {
        let output = seqpipe(&["info", "--dataset", name, "--manifest", &manifest]);
        assert_eq!(output.status.code(), Some(0), "{name}: {}", stderr_of(&output));
        let text = stdout_of(&output);
        assert!(text.contains(samples), "{name}: {text}");
        assert!(text.contains(schema), "{name}: {text}");
    }
}

#[test]
fn bench_report_lands_complete_with_workers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let output = seqpipe(&[
        "bench",
        "--dataset", "toy-synth:train",
        "--manifest", &manifest_arg(),
        "--batch-size", "8",
        "--num-buckets", "3",
        "--workers", "2",
        "--seed", "9",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["corpus"], "toy-synth:train");
    assert_eq!(report["workers"], 2);
    assert_eq!(report["strategies"].as_array().unwrap().len(), 2);
    assert!(report["strategies"][0]["wall_ms"].as_f64().unwrap() >= 0.0);
    // Timings stay out of stdout.
    assert!(!stdout_of(&output).contains("wall"));
}

#[test]
fn zoo_export_via_binary_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scatter.csv");
    let output = seqpipe(&[
        "zoo", "export", "--task", "Image Classification", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_of(&output), "exported 3 rows\n");
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("model,accuracy,throughput,marker_area\n"));
    assert!(csv.contains("ResNet-50,79.2,1200,260"));
}

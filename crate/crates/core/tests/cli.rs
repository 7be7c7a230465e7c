//! The `qpack-lab` binary: exit codes, report preambles and output hygiene.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpack_lab::coherence::{synth_ensemble, write_decays, write_wafer_map, EnsembleSpec};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo").join(name)
}

fn qpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpack-lab")).args(args).output().expect("spawn")
}

fn code(args: &[&str]) -> i32 {
    qpack(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data lines of a report, preamble stripped.
fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["polish"]), 2);
    assert_eq!(code(&["thermal", "--mode", "warp_drive"]), 2);
    assert_eq!(code(&["thermal", "--mode", "qpu_mode", "--payload", "x.toml"]), 2);
    assert_eq!(code(&["coherence", "--wafer", "w.csv", "--report", "r", "--bootstrap", "5,10"]), 2);
    assert_eq!(code(&["--jobs", "0", "thermal", "--mode", "qpu_mode"]), 2);
    assert_eq!(code(&["modes", "--geometry", "/nonexistent/cavity.txt"]), 1);
    assert_eq!(code(&["loss", "--field", "a.field", "--channels", "c.txt", "--frequency", "4.5GHz"]), 1);
}

#[test]
fn modes_then_loss() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpack(&[
        "modes",
        "--geometry",
        s(&data("bare_cavity.txt")),
        "--spacing",
        "1mm",
        "--n-modes",
        "3",
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spectrum = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("# qpack-lab "));
    assert!(!spectrum.contains("# seed:"), "deterministic runs record no seed");
    assert!(dir.path().join("plot_spectrum.csv").exists());
    for k in 1..=3 {
        assert!(dir.path().join(format!("mode_{k:02}.field")).exists());
    }

    // TM₀₁₀ of a 47.3 mm disc: c·j₀₁/(2πa)
    let rows = body(&spectrum);
    let header: Vec<&str> = rows[0].split(',').collect();
    let col = header.iter().position(|h| *h == "frequency_hz").expect("frequency column");
    let f: f64 = rows[1].split(',').nth(col).unwrap().parse().unwrap();
    assert!((f / 2.4257e9 - 1.0).abs() < 0.01, "{f}");

    let report = dir.path().join("loss.json");
    let out = qpack(&[
        "loss",
        "--field",
        s(&dir.path().join("mode_01.field")),
        "--channels",
        s(&data("channels.txt")),
        "--frequency",
        &format!("{f}"),
        "--report",
        "json",
        "--out",
        s(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["manifest"]["subcommand"], "loss");
    assert_eq!(v["manifest"]["inputs"].as_array().unwrap().len(), 2);
    assert!(v["report"]["total_q"].as_f64().unwrap() > 0.0);
}

#[test]
fn readout_synth_is_seeded() {
    let run = |seed: &str| {
        let out = qpack(&["--seed", seed, "readout", "--synth", s(&data("readout_truth.toml"))]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("7");
    assert!(a.contains("# seed: 7"));
    assert_eq!(a, run("7"));
    assert_ne!(body(&a), body(&run("8")));
    assert_eq!(body(&a).len(), 1 + 3);
}

#[test]
fn same_results_for_any_job_count() {
    let run = |jobs: &str| {
        let out = qpack(&["--jobs", jobs, "--seed", "3", "readout", "--synth", s(&data("readout_truth.toml"))]);
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

fn write_wafer(dir: &Path) -> (PathBuf, PathBuf) {
    let records = synth_ensemble(&EnsembleSpec::default(), 5).unwrap();
    let wafer = dir.join("wafer.csv");
    fs::write(&wafer, write_wafer_map(&records).unwrap()).unwrap();
    let decays = dir.join("decays");
    fs::create_dir(&decays).unwrap();
    write_decays(&decays, &records).unwrap();
    (wafer, decays)
}

#[test]
fn coherence_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (wafer, decays) = write_wafer(dir.path());
    let report = dir.path().join("report");
    let out = qpack(&[
        "--seed",
        "1",
        "coherence",
        "--wafer",
        s(&wafer),
        "--decays",
        s(&decays),
        "--bootstrap",
        "sizes=5,20,50,resamples=200",
        "--report",
        s(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["manifest"]["seed"], 1);
    assert!(summary["report"]["measured_t1"].as_u64().unwrap() > 90);
    for name in ["plot_wafer_map.csv", "plot_histogram_t1.csv", "bootstrap_t1_median.csv", "correlation_t1.csv"] {
        assert!(report.join(name).exists(), "{name}");
    }
}

#[test]
fn failed_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (wafer, decays) = write_wafer(dir.path());
    let report = dir.path().join("report");
    // the histograms and wafer map are computed before the oversized bootstrap fails
    let out = qpack(&[
        "--seed",
        "1",
        "coherence",
        "--wafer",
        s(&wafer),
        "--decays",
        s(&decays),
        "--bootstrap",
        "sizes=5,5000",
        "--report",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subsample size"));
    assert!(!report.exists() || fs::read_dir(&report).unwrap().next().is_none());
}

#[test]
fn thermal_presets() {
    let out = qpack(&["thermal", "--mode", "qpu_mode", "--report", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["manifest"]["inputs"][0], "preset:qpu_mode");
    assert!(v["report"]["headroom"]["fraction"].as_f64().unwrap() < 1.0);
    let csv = qpack(&["thermal", "--mode", "high_throughput"]);
    assert!(String::from_utf8(csv.stdout).unwrap().contains("MXC"));
}

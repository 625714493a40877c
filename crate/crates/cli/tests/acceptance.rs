//! Acceptance criterion 9: every fit or benchmark re-run from its own
//! manifest is byte-identical.

use std::fs;
use std::path::Path;
use std::process::Command;

fn coclust() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coclust"))
}

fn run_ok(cmd: &mut Command) {
    let output = cmd.output().expect("spawning coclust");
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().to_string(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn criterion_9_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    run_ok(coclust().args([
        "simulate",
        "ncscbm",
        "--out",
        sim.to_str().unwrap(),
        "--n-citizens",
        "120",
        "--n-posts",
        "90",
        "--k",
        "2",
        "--p-in",
        "0.3",
        "--p-out",
        "0.03",
        "--noise",
        "0.5",
        "--seed",
        "5",
    ]));

    // Fit from flags, then re-run from the emitted manifest.
    let fit1 = tmp.path().join("fit1");
    run_ok(coclust().args([
        "fit",
        "--input",
        sim.to_str().unwrap(),
        "--out",
        fit1.to_str().unwrap(),
        "--k-c",
        "2",
        "--k-p",
        "2",
        "--seed",
        "13",
        "--h",
        "0.5",
        "--calibration",
        "first",
    ]));
    let fit2 = tmp.path().join("fit2");
    run_ok(coclust().args([
        "fit",
        "--input",
        sim.to_str().unwrap(),
        "--out",
        fit2.to_str().unwrap(),
        "--config",
        fit1.join("manifest.toml").to_str().unwrap(),
    ]));
    let b1 = dir_bytes(&fit1);
    let b2 = dir_bytes(&fit2);
    assert_eq!(b1.len(), b2.len());
    for ((name1, bytes1), (name2, bytes2)) in b1.iter().zip(&b2) {
        assert_eq!(name1, name2);
        assert_eq!(bytes1, bytes2, "{name1} differs between re-runs");
    }
    println!("PASS criterion 9 (fit): manifest re-run byte-identical");

    // Benchmark smoke grid, re-run from its manifest; the deterministic
    // table must match byte for byte (timings live in a separate file).
    let bench1 = tmp.path().join("bench1");
    run_ok(coclust().args([
        "benchmark",
        "--out",
        bench1.to_str().unwrap(),
        "--exponents",
        "0,1",
        "--axes",
        "both",
        "--reps",
        "2",
        "--restarts",
        "20",
        "--n-docs",
        "120",
        "--n-words",
        "120",
        "--seed",
        "3",
    ]));
    let bench2 = tmp.path().join("bench2");
    run_ok(coclust().args([
        "benchmark",
        "--out",
        bench2.to_str().unwrap(),
        "--config",
        bench1.join("manifest.toml").to_str().unwrap(),
    ]));
    let t1 = fs::read(bench1.join("benchmark.tsv")).unwrap();
    let t2 = fs::read(bench2.join("benchmark.tsv")).unwrap();
    assert_eq!(t1, t2, "benchmark tables differ between re-runs");
    let m1 = fs::read(bench1.join("manifest.toml")).unwrap();
    let m2 = fs::read(bench2.join("manifest.toml")).unwrap();
    assert_eq!(m1, m2);
    println!("PASS criterion 9 (benchmark): manifest re-run byte-identical");
}

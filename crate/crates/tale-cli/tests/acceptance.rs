//! Acceptance suite: every verification criterion at its stated tolerance,
//! one pass/fail line per criterion (visible with `--nocapture`).
//!
//! Criterion 13 is additionally exercised end-to-end through the compiled
//! binary: two `verify-all` runs with the same seed must produce
//! byte-identical output files.

use std::path::Path;
use std::process::Command;
use tale_cli::verify::{run_criterion, VerifyConfig, DEFAULT_SEED};

fn full_config() -> VerifyConfig {
    VerifyConfig {
        seed: DEFAULT_SEED,
        samples: 4096,
        quick: false,
        out_dir: None,
    }
}

fn run_and_report(id: u32, budget_seconds: f64) {
    let outcome = run_criterion(id, &full_config()).expect("criterion execution");
    println!(
        "criterion {:02} {:<28} {}  ({:.2}s, budget {:.0}s)",
        outcome.id,
        outcome.name,
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.seconds,
        budget_seconds,
    );
    assert!(
        outcome.passed,
        "criterion {} ({}) failed: {}",
        outcome.id,
        outcome.name,
        serde_json::to_string_pretty(&outcome.details).unwrap()
    );
    assert!(
        outcome.seconds < budget_seconds,
        "criterion {} exceeded its runtime budget: {:.2}s > {:.0}s",
        outcome.id,
        outcome.seconds,
        budget_seconds
    );
}

#[test]
fn criterion_01_spin_lift_counts() {
    run_and_report(1, 1.0);
}

#[test]
fn criterion_02_weyl_fixed_spaces() {
    run_and_report(2, 1.0);
}

#[test]
fn criterion_03_clifford_identities() {
    run_and_report(3, 1.0);
}

#[test]
fn criterion_04_eh_ricci_flat() {
    run_and_report(4, 30.0);
}

#[test]
fn criterion_05_eh_ale_order() {
    run_and_report(5, 30.0);
}

#[test]
fn criterion_06_inversion_formula_oracle() {
    run_and_report(6, 10.0);
}

#[test]
fn criterion_07_compactified_regularity() {
    run_and_report(7, 60.0);
}

#[test]
fn criterion_08_flat_twistor_family() {
    run_and_report(8, 10.0);
}

#[test]
fn criterion_09_zero_isolation_growth() {
    run_and_report(9, 10.0);
}

#[test]
fn criterion_10_eh_parallel_spinors() {
    run_and_report(10, 120.0);
}

#[test]
fn criterion_11_compactified_twistor() {
    run_and_report(11, 180.0);
}

#[test]
fn criterion_12_volume_ratios() {
    run_and_report(12, 300.0);
}

#[test]
fn criterion_13_determinism_in_process() {
    run_and_report(13, 120.0);
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output dir")
        .map(|e| {
            let e = e.expect("dir entry");
            (
                e.file_name().to_string_lossy().to_string(),
                std::fs::read(e.path()).expect("read file"),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn criterion_13_determinism_through_the_binary() {
    let exe = env!("CARGO_BIN_EXE_tale");
    let base = std::env::temp_dir().join(format!("tale-acceptance-{}", std::process::id()));
    let dir1 = base.join("run1");
    let dir2 = base.join("run2");
    for dir in [&dir1, &dir2] {
        let _ = std::fs::remove_dir_all(dir);
        std::fs::create_dir_all(dir).unwrap();
        let status = Command::new(exe)
            .args([
                "verify-all",
                "--seed",
                "0x5EED",
                "--quick",
                "--samples",
                "256",
                "--out",
                dir.to_str().unwrap(),
            ])
            .status()
            .expect("run verify-all");
        assert!(status.success(), "verify-all exited with {status}");
    }
    let (a, b) = (dir_snapshot(&dir1), dir_snapshot(&dir2));
    assert_eq!(
        a.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        b.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "file sets differ"
    );
    for ((name, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(bytes_a, bytes_b, "output file {name} differs between runs");
    }
    println!(
        "criterion 13 determinism-through-binary PASS ({} files byte-identical)",
        a.len()
    );
    let _ = std::fs::remove_dir_all(&base);
}

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hilfer_relax::specfun::mittag_leffler;
use serde_json::Value;

/// A cheap variant of the benchmark.
const SMALL: &str = r#"{
  "schema": 1,
  "modes": 4,
  "mesh": {"nodes_per_interval": 24},
  "control": {"lo": -1.0, "hi": 1.0, "atoms": 3},
  "search": {"pieces": 2, "budget": 200, "starts": 2, "n_cells": 16, "max_passes": 4, "min_step": 0.0625}
}"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config-in.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hilfer-relax"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env("HILFER_RELAX_THREADS", "1")
        .output()
        .unwrap()
}

fn with(base: &str, patch: &str) -> String {
    let mut v: Value = serde_json::from_str(base).unwrap();
    let p: Value = serde_json::from_str(patch).unwrap();
    for (k, x) in p.as_object().unwrap() {
        v[k] = x.clone();
    }
    v.to_string()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

/// Every file in `out` except the manifest is listed, with its true hash.
fn assert_manifest_complete(out: &Path) {
    let m = manifest(out);
    let listed: BTreeSet<String> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_owned())
        .collect();
    let present: BTreeSet<String> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(listed, present);
    assert_eq!(m["config_sha256"], m["files"][0]["sha256"]);
}

fn snapshot(out: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn solve_is_deterministic_and_fully_manifested() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(d.path(), SMALL, &["solve"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_manifest_complete(&d.path().join("out"));
    }
    assert_eq!(
        snapshot(&a.path().join("out")),
        snapshot(&b.path().join("out"))
    );
    let bounds: Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("out/bounds.json")).unwrap())
            .unwrap();
    let d2 = bounds["bounds"]["d2"].as_f64().unwrap();
    assert!(bounds["interval_sups"][1].as_f64().unwrap() <= d2);
}

#[test]
fn free_first_mode_follows_the_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let cfg = with(
        SMALL,
        r#"{"nonlinearity": {"kind": "zero"}, "impulse": null, "initial": {"kind": "mode", "index": 1, "amplitude": 1.0}}"#,
    );
    let o = run(d.path(), &cfg, &["solve"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rows = csv::Reader::from_path(d.path().join("out/trajectory.csv")).unwrap();
    let (mu, lambda) = (0.5, 0.9);
    let mut checked = 0;
    for r in rows.records() {
        let r = r.unwrap();
        let t: f64 = r[1].parse().unwrap();
        let y: f64 = r[3].parse().unwrap();
        let want = if &r[2] == "1" {
            mittag_leffler(mu, lambda, -t.powf(mu)).unwrap()
        } else {
            0.0
        };
        assert!(
            (y - want).abs() <= 1e-6,
            "t = {t}, mode {}: {y} vs {want}",
            &r[2]
        );
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn violated_hypotheses_are_rejected_with_the_clause() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &with(SMALL, r#"{"impulse": {"lipschitz": 0.9}}"#),
        &["verify"],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("FAIL H(h)"), "{err}");
    let o = run(d.path(), &with(SMALL, r#"{"p": 2.0}"#), &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL pμ > 1"));
    assert!(!d.path().join("out").exists());
}

#[test]
fn unknown_keys_fail_closed() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &with(SMALL, r#"{"colour": 3}"#), &["solve"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn control_free_cost_has_no_relaxation_gap() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &with(
            SMALL,
            r#"{"integrand": {"kind": "one"}, "search": {"pieces": 2, "budget": 200, "starts": 2, "n_cells": 128}}"#,
        ),
        &["relax"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let out = d.path().join("out");
    assert_manifest_complete(&out);
    let reports: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for r in reports.as_array().unwrap() {
        assert!(r["gap"].as_f64().unwrap().abs() <= 1e-8);
        assert!((r["m_o"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    }
    let curve = fs::read_to_string(out.join("chattering.csv")).unwrap();
    assert!(curve.starts_with("control,n_cells,pc_gap,weak_star_gap,relaxed_norm"));
    assert!(curve.lines().count() > 1);
}

#[test]
fn batch_sweeps_every_pair_without_violations() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), SMALL, &["batch"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let out = d.path().join("out");
    assert_manifest_complete(&out);
    let mut rows = csv::Reader::from_path(out.join("batch.csv")).unwrap();
    let rows: Vec<_> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 16);
}

#[test]
fn caputo_case_engages_the_reduction_suite() {
    let d = tempfile::tempdir().unwrap();
    let cfg = with(
        SMALL,
        r#"{"mu": 0.999, "nu": 1.0, "mesh": {"nodes_per_interval": 64}}"#,
    );
    let o = run(d.path(), &cfg, &["verify"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.contains("PASS suite reductions"), "{stdout}");
    assert!(stdout.contains("PASS Caputo reduction"), "{stdout}");
}

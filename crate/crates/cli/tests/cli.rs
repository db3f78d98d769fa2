use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use qcoupler_core::coupler::{phase_aligned_distance, su2_target, transfer_matrix, CouplerSettings};
use serde_json::Value;

fn qcoupler(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcoupler"))
        .args(args)
        .current_dir(dir)
        .env_remove("QCOUPLER_OUT_DIR")
        .output()
        .unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into()).collect();
    v.sort();
    v
}

#[test]
fn sweep_example_writes_curve_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcoupler(dir.path(), &["sweep", "--kappa-over-k0", "0.1", "--length-mm", "2", "--wavelength-nm", "650", "-o", "fig.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("fig.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta_over_k0,A,B,theta"));
    assert_eq!(lines.count(), 1001);
    let m = read_json(&dir.path().join("fig.manifest.json"));
    assert_eq!(m["subcommand"], "sweep");
    assert_eq!(m["config"]["kappa-over-k0"], "0.1");
    assert_eq!(m["config"]["points"], "1001");
    assert!(m["seed"].is_null());
}

#[test]
fn solve_round_trips_to_target() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcoupler(dir.path(), &["solve", "--theta", "1.5707963", "--phi", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("solve.json"));
    let s: CouplerSettings = serde_json::from_value(v["settings"].clone()).unwrap();
    let chi = 1.5707963f64 / 2.0;
    let d = phase_aligned_distance(&transfer_matrix(&s), &su2_target(chi.cos(), chi.sin(), 0.0));
    assert!(d < 1e-8, "{d}");
}

#[test]
fn unknown_flag_is_usage_error_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcoupler(dir.path(), &["sweep", "--no-such-flag", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(files(dir.path()).is_empty());
    let o = qcoupler(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(files(dir.path()).is_empty());
}

#[test]
fn domain_errors_exit_one_and_name_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcoupler(dir.path(), &["solve", "--theta", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("TargetUnreachable"));
    let o = qcoupler(dir.path(), &["weak", "--state", "fock-list: 1,0=0.7071067811865476,0; 0,1=0,0.7071067811865476"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotReconstructible"));
    let o = qcoupler(dir.path(), &["state", "--state", "fock-list: 0,0=0.6,0; 1,1=0.7,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NormalizationError"));
    assert!(files(dir.path()).is_empty());
}

#[test]
fn state_spec_parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcoupler(dir.path(), &["state", "--state", "fock-list: 0,0=0.6,0; 1,x=0.8,0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ParseError") && err.contains("position 24"), "{err}");
}

#[test]
fn homodyne_is_reproducible_from_manifest_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = qcoupler(p, &["homodyne", "--samples", "5000", "--seed", "11", "--strategy", "full-random", "-o", "a.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&p.join("a.manifest.json"));
    assert_eq!(m["seed"], 11);
    let cfg: BTreeMap<String, String> = serde_json::from_value(m["config"].clone()).unwrap();
    let text: String = cfg.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    std::fs::write(p.join("rerun.cfg"), text).unwrap();
    let o = qcoupler(p, &["homodyne", "--config", "rerun.cfg", "--workers", "1", "-o", "b.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(p.join("a.csv")).unwrap(), std::fs::read(p.join("b.csv")).unwrap());
    let head = std::fs::read_to_string(p.join("a.csv")).unwrap();
    assert_eq!(head.lines().next(), Some("chi,psi,value"));
    assert_eq!(head.lines().count(), 5001);
}

#[test]
fn flags_override_config_and_unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("c.cfg"), "points = 11\nto = 0.002\n").unwrap();
    let o = qcoupler(p, &["sweep", "--config", "c.cfg", "--points", "21"]);
    assert!(o.status.success());
    let m = read_json(&p.join("sweep.manifest.json"));
    assert_eq!(m["config"]["points"], "21");
    assert_eq!(m["config"]["to"], "0.002");
    std::fs::write(p.join("bad.cfg"), "pionts = 11\n").unwrap();
    let o = qcoupler(p, &["sweep", "--config", "bad.cfg", "-o", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!p.join("x.csv").exists());
}

#[test]
fn reconstruct_reads_homodyne_records() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(qcoupler(p, &["homodyne", "--samples", "20000", "-o", "h.csv"]).status.success());
    let o = qcoupler(p, &["reconstruct", "--input", "h.csv", "--bins", "60", "-o", "r.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(p.join("r.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("e1,e2,density"));
    assert_eq!(text.lines().count(), 60 * 60 + 1);
    let fit = read_json(&p.join("r.fit.json"));
    assert!((fit["fit"]["mean1"].as_f64().unwrap() - 4.0).abs() < 0.1);
    let m = read_json(&p.join("r.manifest.json"));
    assert_eq!(m["inputs"][0], "h.csv");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn weak_writes_records_and_surface() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = qcoupler(p, &["weak", "--p-bins", "161", "--surface-points", "31"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = std::fs::read_to_string(p.join("weak.csv")).unwrap();
    assert_eq!(rec.lines().next(), Some("chi,p,probability,meter_expectation,phase,masked"));
    assert_eq!(rec.lines().count(), 24 * 161 + 1);
    let surf = std::fs::read_to_string(p.join("weak.surface.csv")).unwrap();
    assert_eq!(surf.lines().next(), Some("p1,p2,phase,amplitude,masked"));
    assert_eq!(surf.lines().count(), 31 * 31 + 1);
    // masked rows leave the phase column empty
    assert!(surf.lines().skip(1).all(|l| l.ends_with("true") == l.split(',').nth(2).unwrap().is_empty()));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qcoupler"))
        .args(["state", "--state", "coherent:1,0,0,0.5", "--half-width", "6", "--points", "121"])
        .env("QCOUPLER_OUT_DIR", dir.path().join("runs"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("runs/state.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x,p"));
    assert!(dir.path().join("runs/state.manifest.json").exists());
}

#[test]
fn state_json_round_trips_through_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(qcoupler(p, &["state", "--kind", "json", "-o", "s.json"]).status.success());
    let o = qcoupler(p, &["state", "--state-file", "s.json", "--kind", "joint", "--axis", "p", "--half-width", "5", "--points", "41", "-o", "j.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = std::fs::read_to_string(p.join("j.csv")).unwrap();
    assert_eq!(j.lines().next(), Some("x1,x2,re,im"));
    assert_eq!(j.lines().count(), 41 * 41 + 1);
}

#[test]
fn defects_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcoupler(dir.path(), &["defects", "--eps1", "0.01", "--eps2", "0.02"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("defects.json"));
    assert!((v["mzi_best_fit"]["residual"].as_f64().unwrap() - 0.01).abs() < 1e-3);
    assert!(v["recalibrated_coupler"]["distance"].as_f64().unwrap() < 1e-8);
}

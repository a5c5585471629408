use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kcmfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcmfold")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = kcmfold(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

/// Run-log data rows, skipping the version line and the header.
fn runlog_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().skip(2).map(String::from).collect()
}

#[test]
fn one_iteration_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["fold", "--seq", "AAAA", "--vacuum", "--max-iters", "1", "--out", out]);
    assert_eq!(runlog_rows(&dir.path().join("runlog.csv")).len(), 1);
    let m = manifest(dir.path());
    assert_eq!(m["result"]["iterations"], 1);
    assert_eq!(m["field"]["solvation_mode"], "Off");
    assert!(m["seed"].is_u64());
    for f in ["initial.pdb", "final.pdb", "dihedrals.csv", "timings.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn same_seed_same_log() {
    let run = |dir: &Path| {
        ok(&[
            "fold", "--seq", "GASC", "--init", "random", "--seed", "7", "--max-iters", "15", "--threads", "1", "--out",
            dir.to_str().unwrap(),
        ]);
        std::fs::read(dir.join("runlog.csv")).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn snapshots_and_freezing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["fold", "--seq", "ALA ALA ALA", "--max-iters", "4", "--snapshot-every", "2", "--freeze", "2:phi,0", "--out", out]);
    assert!(dir.path().join("snapshot_000002.pdb").exists());
    let m = manifest(dir.path());
    assert_eq!(m["frozen"], serde_json::json!(["2:phi", "1:phi"]));
    let rows = csv_rows(&dir.path().join("dihedrals.csv"));
    let phi2: Vec<&str> = rows.iter().filter(|r| &r[1] == "2").map(|r| r.get(3).unwrap()).collect();
    assert!(phi2.len() >= 2 && phi2.iter().all(|v| *v == phi2[0]));
}

#[test]
fn sasa_table_sums_to_total() {
    let dir = tempfile::tempdir().unwrap();
    let pdb = dir.path().join("in.pdb");
    let fold_out = dir.path().join("fold");
    ok(&["fold", "--seq", "GSAC", "--max-iters", "0", "--out", fold_out.to_str().unwrap()]);
    std::fs::copy(fold_out.join("final.pdb"), &pdb).unwrap();
    let out = dir.path().join("sasa");
    ok(&["sasa", "--pdb", pdb.to_str().unwrap(), "--samples", "4096", "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("sasa.csv"));
    let area: f64 = rows.iter().map(|r| r[7].parse::<f64>().unwrap()).sum();
    let g: f64 = rows.iter().map(|r| r[9].parse::<f64>().unwrap()).sum();
    let m = manifest(&out);
    assert!((area - m["total"]["a_exp"].as_f64().unwrap()).abs() < 1e-9 * area);
    assert!((g - m["total"]["g_cav"].as_f64().unwrap()).abs() < 1e-9 * g.abs().max(1.0));
    assert_eq!(m["field"]["solvation"]["n_samples"], 4096);
}

#[test]
fn bench_table_has_a_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["bench", "--sizes", "50,100,200", "--no-solvation", "--out", out]);
    let rows = csv_rows(&dir.path().join("bench.csv"));
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let ms = |k: usize| row[k].parse::<f64>().unwrap();
        let (hashed, brute) = (ms(7), ms(11));
        assert!(hashed > 0.0 && brute > 0.0);
        assert!((ms(12) - brute / hashed).abs() < 1e-3 * ms(12) + 1e-4);
    }
    let atoms: Vec<usize> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(atoms.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn scans_write_grids() {
    let dir = tempfile::tempdir().unwrap();
    let rama = dir.path().join("rama");
    ok(&["scan-rama", "--seq", "AA", "--grid", "6", "--out", rama.to_str().unwrap()]);
    assert_eq!(csv_rows(&rama.join("rama.csv")).len(), 36);
    let hinge = dir.path().join("hinge");
    ok(&["scan-hinge", "--seq", "AAA", "--hinges", "2:phi,2:psi", "--steps", "3", "--out", hinge.to_str().unwrap()]);
    let rows = csv_rows(&hinge.join("hinge.csv"));
    assert_eq!(rows.len(), 9);
}

#[test]
fn batch_runs_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "fold", "--seq", "A", "--batch", "3", "--batch-lengths", "3..5", "--init", "random", "--seed", "1", "--max-iters", "3", "--out", out,
    ]);
    let runs = csv_rows(&dir.path().join("batch.csv"));
    assert_eq!(runs.len(), 3);
    let residues: usize = runs.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(csv_rows(&dir.path().join("batch_dihedrals.csv")).len(), residues);
}

#[test]
fn errors_exit_nonzero() {
    let out = kcmfold(&["fold", "--seq", "AXZ", "--max-iters", "1", "--out", "/nonexistent/never"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = kcmfold(&["fold", "--seq", "AAA", "--pdb", "x.pdb"]);
    assert!(!out.status.success());
    let out = kcmfold(&["fold", "--seq", "AAA", "--freeze", "9:phi", "--max-iters", "1"]);
    assert!(!out.status.success());
}

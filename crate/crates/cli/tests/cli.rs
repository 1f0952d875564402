use std::path::Path;
use std::process::{Command, Output};

use adiff_cli::io::{Format, Table};
use serde_json::Value;

fn adiff(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiff"))
        .args(args)
        .env("ADIFF_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exited normally")
}

fn table(path: &Path) -> Table {
    Table::read(Format::Csv, std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn rs_eta_at_zero_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rs");
    let o = adiff(&["autocorr", "--system", "rs", "--exact", "--max-lag", "0"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out.join("autocorrelation.csv"));
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0][t.column_index("eta_exact_re").unwrap()], "1");
}

#[test]
fn homometry_report_has_the_order_six_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let o = adiff(&["homometry", "--table", "gm-pair", "--max-order", "6", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("homometry.json")).unwrap()).unwrap();
    let orders = report["orders"].as_array().unwrap();
    assert!(orders[..4].iter().all(|o| o["equal"] == true));
    assert_eq!(orders[4]["order"], 6);
    assert_eq!(orders[4]["witness"]["left"], "7466871386/3");
    assert_eq!(orders[4]["witness"]["right"], "7471104986/3");
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema"], 1);
    assert_eq!(manifest["config"]["command"], "homometry");
}

#[test]
fn homometric_rows_have_identical_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (row, out) in [("1", &a), ("2", &b)] {
        let o = adiff(&["spectrum", "--system", "gm-pair", "--row", row, "--out", out.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 0);
    }
    let o = adiff(&["compare", a.to_str().unwrap(), b.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["max_abs_deviation"], 0.0);
}

#[test]
fn volterra_and_fourier_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (v, f) = (dir.path().join("v"), dir.path().join("f"));
    let runs: [(&str, &Path); 2] = [("volterra", &v), ("fourier", &f)];
    for (method, out) in runs {
        let o = adiff(
            &["distfn", "--system", "tm", "--method", method, "--grid", "1024", "--out", out.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (dv, df) = (v.join("distribution.csv"), f.join("distribution.csv"));
    let o = adiff(&["compare", dv.to_str().unwrap(), df.to_str().unwrap(), "--tolerance", "1e-2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = adiff(&["compare", dv.to_str().unwrap(), df.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 4);
}

#[test]
fn rerun_reproduces_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = adiff(
        &["random", "--mode", "bernoulli", "--p", "0.25", "--half-length", "2000", "--trials", "4", "--seed", "9"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = out.join("manifest.json");
    let again = dir.path().join("again");
    assert_eq!(code(&adiff(&["rerun", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()], dir.path())), 0);
    let mut edited: Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    edited["files"][0]["sha256"] = Value::from("0".repeat(64));
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_vec(&edited).unwrap()).unwrap();
    let third = dir.path().join("third");
    assert_eq!(code(&adiff(&["rerun", tampered.to_str().unwrap(), "--out", third.to_str().unwrap()], dir.path())), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&adiff(&["autocorr", "--bogus"], out)), 2);
    assert_eq!(code(&adiff(&["autocorr", "--system", "pd", "--exact", "--max-lag", "3"], out)), 2);
    let o = adiff(
        &["distfn", "--system", "tm", "--method", "volterra", "--grid", "1024", "--max-iterations", "2"],
        out,
    );
    assert_eq!(code(&o), 3);
    let config = out.join("config.json");
    std::fs::write(&config, r#"{"command": "generate", "parameters": {"system": "tm", "half_length": 4}, "colour": 1}"#)
        .unwrap();
    assert_eq!(code(&adiff(&["run", "--config", config.to_str().unwrap()], out)), 2);
    let a = out.join("w");
    assert_eq!(code(&adiff(&["generate", "--system", "tm", "--half-length", "4", "--out", a.to_str().unwrap()], out)), 0);
    let b = out.join("s");
    assert_eq!(code(&adiff(&["autocorr", "--system", "tm", "--exact", "--max-lag", "4", "--out", b.to_str().unwrap()], out)), 0);
    assert_eq!(code(&adiff(&["compare", a.to_str().unwrap(), b.to_str().unwrap()], out)), 1);
}

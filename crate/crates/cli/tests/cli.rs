use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ttedopa_cli::table::Table;
use ttedopa_cli::{Preset, RunConfig};

fn ttedopa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttedopa"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn small_config(preset: Preset, dir: &Path) -> PathBuf {
    let mut cfg = RunConfig::preset(preset).unwrap();
    cfg.temperatures = vec![300.0];
    cfg.auto_chain_length = false;
    cfg.chain_length = Some(3);
    cfg.local_dims = Some(vec![4, 3, 3]);
    cfg.evolution.dt = 2.5e-4;
    cfg.evolution.t_max = 0.01;
    cfg.evolution.stride = 8;
    cfg.evolution.chi_max = 16;
    let path = dir.join(format!("{preset:?}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    Table::read(path).unwrap().column(name).unwrap()
}

#[test]
fn negative_temperature_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ttedopa(&["chain-coeffs", "--temperature=-5", "--sites", "4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("temperature"), "{err}");
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut value = serde_json::to_value(RunConfig::preset(Preset::DephasingWscp).unwrap()).unwrap();
    value["bogus"] = serde_json::json!(1);
    std::fs::write(&path, value.to_string()).unwrap();
    let out = ttedopa(&["simulate", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn zero_temperature_chain_is_the_standard_chain() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("thermal.csv");
    let b = dir.path().join("standard.csv");
    let args = ["chain-coeffs", "--temperature", "0", "--sites", "40", "--output"];
    assert!(ttedopa(&[&args[..], &[a.to_str().unwrap()]].concat(), dir.path()).status.success());
    let std_args = [&args[..], &[b.to_str().unwrap(), "--standard"]].concat();
    assert!(ttedopa(&std_args, dir.path()).status.success());
    for name in ["omega_n", "kappa_n"] {
        let (x, y) = (column(&a, name), column(&b, name));
        assert_eq!(x.len(), 40);
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-9));
    }
}

#[test]
fn compare_of_a_file_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("theta.csv");
    let out = ttedopa(
        &["dephasing-oracle", "--temperature", "77", "--t-max", "0.2", "--output", f.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let theta = column(&f, "coherence_0");
    assert_eq!(theta[0], 0.5);
    assert_eq!(theta.len(), 21);
    let out = ttedopa(&["compare", f.to_str().unwrap(), f.to_str().unwrap(), "--column", "coherence_0"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(value, 0.0);
}

#[test]
fn manifest_reproduces_its_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(Preset::DephasingWscp, dir.path());
    let first = dir.path().join("first.csv");
    let out = ttedopa(
        &["simulate", "--config", cfg.to_str().unwrap(), "--output", first.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = dir.path().join("first.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["status"], "ok");
    assert_eq!(m["chain_length"], 3);

    let second = dir.path().join("second.csv");
    let out = ttedopa(
        &["simulate", "--config", manifest.to_str().unwrap(), "--output", second.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["coherence_0", "sigma_x_0", "sigma_y_0"] {
        let (a, b) = (column(&first, name), column(&second, name));
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() <= 1e-12), "{name}");
    }
}

#[test]
fn dimer_manifest_records_both_baths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(Preset::DimerWscp, dir.path());
    let csv = dir.path().join("dimer.csv");
    let out = ttedopa(
        &["simulate", "--config", cfg.to_str().unwrap(), "--output", csv.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("dimer.manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["cross_coupling"], 69.0);
    let sets = m["coefficients"].as_array().unwrap();
    assert_eq!(sets.len(), 2);
    assert_eq!(sets[0]["sha256"], sets[1]["sha256"]);
    assert_eq!(sets[0]["kappas"], sets[1]["kappas"]);
    assert!((column(&csv, "p_plus")[0] - 1.0).abs() < 1e-14);
}

#[test]
fn several_temperatures_write_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(Preset::DephasingWscp, dir.path());
    let out = ttedopa(
        &["simulate", "--config", cfg.to_str().unwrap(), "--temperature", "0", "--temperature", "77", "--output", "run.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["run_T0K.csv", "run_T77K.csv", "run_T0K.manifest.json", "run_T77K.manifest.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn exact_oracle_agrees_with_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::preset(Preset::DephasingWscp).unwrap();
    cfg.temperatures = vec![300.0];
    cfg.auto_chain_length = false;
    cfg.chain_length = Some(2);
    cfg.local_dims = Some(vec![4, 4]);
    cfg.evolution.dt = 1e-4;
    cfg.evolution.t_max = 0.02;
    cfg.evolution.stride = 20;
    cfg.evolution.chi_max = 64;
    cfg.evolution.svd_cutoff = 0.0;
    let path = dir.path().join("ed.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    assert!(ttedopa(&["simulate", "--config", p, "--output", "tebd.csv"], dir.path()).status.success());
    assert!(ttedopa(&["ed-oracle", "--config", p, "--output", "ed.csv"], dir.path()).status.success());
    let out = ttedopa(&["compare", "tebd.csv", "ed.csv", "--column", "coherence_0"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (a, b) = (column(&dir.path().join("tebd.csv"), "coherence_0"), column(&dir.path().join("ed.csv"), "coherence_0"));
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-6));
}

#[test]
fn occupation_reports_required_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = ttedopa(&["occupation", "--temperature", "300", "--sites", "20", "--output", "occ.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = dir.path().join("occ.csv");
    let (occ, dims) = (column(&f, "occupation"), column(&f, "required_dim"));
    assert_eq!(occ.len(), 20);
    for (n, d) in occ.iter().zip(&dims) {
        assert!(*d >= 2.0 && *d >= 4.0 * n);
    }
}

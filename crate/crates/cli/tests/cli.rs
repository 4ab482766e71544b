use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rieszgas::io::read_snapshot;
use rieszgas::kernel::{ExternalField, GasModel, KernelSpec};
use rieszgas::sampler::{init_configuration, InitStrategy};
use serde_json::Value;

fn rieszgas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rieszgas")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run_ok(config: &Path, command: &str, out: &Path) -> Output {
    let o = rieszgas(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), command]);
    assert!(o.status.success(), "{command} failed: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#"
[model]
dim = 3
kernel = "coulomb"
beta = 1.0
n = 30

[sampler]
algorithm = "mala"
step_size = 0.02
sweeps = 400
burn_in = 100
thin = 10
seed = 5
init_radius = 0.8
"#;

#[test]
fn sample_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    run_ok(&cfg, "sample", &out);
    for name in ["trace.csv", "snapshot.csv", "diagnostics.json", "histogram.csv", "manifest.json", "config.toml"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let diag = json(&out.join("diagnostics.json"));
    assert_eq!(diag["N"], 30);
    assert_eq!(diag["seed"], 5);
    let ks = diag["ks"].as_f64().unwrap();
    assert!(ks > 0.0 && ks < 1.0);
    let fm = diag["fm_distance"].as_f64().unwrap();
    assert!(fm > 0.0 && fm <= 2.0);
    assert_eq!(diag["fm_method"], "truncated-transport");
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["config_digest"], diag["config_digest"]);
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "sweep,beta_N,energy,accept_rate_rw,accept_rate_mala,max_radius");
    assert_eq!(lines.count(), 30);
}

#[test]
fn reruns_are_byte_identical_and_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    run_ok(&cfg, "sample", &a);
    // rerun from the config the tool wrote, into another directory
    let b = dir.path().join("b");
    run_ok(&a.join("config.toml"), "sample", &b);
    for name in ["trace.csv", "snapshot.csv", "diagnostics.json", "histogram.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    // the written config reparses to the same settings: only output.dir differs
    let ta: toml::Value = toml::from_str(&fs::read_to_string(a.join("config.toml")).unwrap()).unwrap();
    let mut tb: toml::Value = toml::from_str(&fs::read_to_string(b.join("config.toml")).unwrap()).unwrap();
    tb["output"]["dir"] = ta["output"]["dir"].clone();
    assert_eq!(ta, tb);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_ok(&cfg, "sample", &a);
    let o = rieszgas(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "6", "sample"]);
    assert!(o.status.success());
    assert_eq!(json(&b.join("diagnostics.json"))["seed"], 6);
    assert_ne!(fs::read(a.join("snapshot.csv")).unwrap(), fs::read(b.join("snapshot.csv")).unwrap());
    assert_ne!(json(&a.join("manifest.json"))["config_digest"], json(&b.join("manifest.json"))["config_digest"]);
}

#[test]
fn zero_sweeps_keeps_the_initial_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("sweeps = 400", "sweeps = 0").replace("burn_in = 100", "burn_in = 0");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("run");
    run_ok(&cfg, "sample", &out);
    let snap = read_snapshot(fs::read_to_string(out.join("snapshot.csv")).unwrap().as_bytes()).unwrap();
    let model = GasModel::new(KernelSpec::coulomb(3).unwrap(), ExternalField::quadratic(), 1.0).unwrap();
    let init = init_configuration(30, &model, &InitStrategy::UniformBall { radius: 0.8 }, 5).unwrap();
    assert_eq!(snap.coords(), init.coords());
    assert!(json(&out.join("diagnostics.json"))["ks"].is_number());
}

#[test]
fn diagnose_reproduces_sample_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = dir.path().join("run");
    run_ok(&cfg, "sample", &run);
    let again = dir.path().join("again");
    let snap = run.join("snapshot.csv");
    let o = rieszgas(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
        "diagnose",
        "--snapshot",
        snap.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (a, b) = (json(&run.join("diagnostics.json")), json(&again.join("diagnostics.json")));
    for key in ["ks", "fm_distance", "max_radius", "N"] {
        assert_eq!(a[key], b[key], "{key}");
    }
}

#[test]
fn equilibrium_summary_quadratic_and_quartic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("eq");
    run_ok(&cfg, "equilibrium", &out);
    let s = json(&out.join("summary.json"));
    assert!((s["R0"].as_f64().unwrap() - 0.793700).abs() < 1e-6);
    assert!((s["C_star"].as_f64().unwrap() - 1.889882).abs() < 1e-6);
    assert!((s["R_star"].as_f64().unwrap() - 0.793700).abs() < 1e-6);
    assert_eq!(s["r0"].as_f64().unwrap(), 0.0);
    assert!(s["normalization_error"].as_f64().unwrap() < 1e-10);
    let res = json(&out.join("residual.json"));
    assert!(res["on_support_max_dev"].as_f64().unwrap() < 1e-5);
    assert!(res["off_support_min_excess"].as_f64().unwrap() > -1e-5);
    let density = fs::read_to_string(out.join("density.csv")).unwrap();
    assert!(density.starts_with("r,M,cumulative_mass\n"));

    let quartic = write_config(dir.path(), &format!("{SMALL}\n[field]\nkind = \"power\"\np = 4.0\n"));
    let out = dir.path().join("eq4");
    run_ok(&quartic, "equilibrium", &out);
    let s = json(&out.join("summary.json"));
    assert_eq!(s["r0"].as_f64().unwrap(), 0.0);
    assert!((s["R0"].as_f64().unwrap() - 0.757858).abs() < 1e-6);
    assert!(s["R_star"].is_null());
}

#[test]
fn decreasing_field_is_too_weak() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("down.csv"), "r,V,dV\n0,0,-1\n1,-1,-1\n2,-2,-1\n").unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[field]\nkind = \"table\"\npath = \"down.csv\"\n"));
    let o = rieszgas(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap(), "equilibrium"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too weak"));
}

#[test]
fn prescribe_then_sample_with_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[prescribe]\ntarget_radius = 1.0\nhinge = 2.0\nr_max = 3.0\ntable_points = 3001\n");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("field");
    run_ok(&cfg, "prescribe", &out);
    let table = fs::read_to_string(out.join("field_table.csv")).unwrap();
    let mut rows = table.lines();
    assert_eq!(rows.next().unwrap(), "r,V,dV");
    let first: Vec<f64> = rows.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] + 1.5).abs() < 1e-12);
    let report = json(&out.join("optimality.json"));
    assert!(report["plateau_max_dev"].as_f64().unwrap() < 1e-9);
    assert!(report["off_support_min_excess"].as_f64().unwrap() > -1e-9);
    assert!(report["robin_constant"].as_f64().unwrap().abs() < 1e-9);

    let sample_cfg = write_config(
        dir.path(),
        &format!("{SMALL}\n[field]\nkind = \"table\"\npath = \"field/field_table.csv\"\n"),
    );
    let run = dir.path().join("run");
    run_ok(&sample_cfg, "sample", &run);
    let diag = json(&run.join("diagnostics.json"));
    assert!(diag["ks"].is_number());
    assert_eq!(diag["warnings"].as_array().unwrap().len(), 0);
}

#[test]
fn short_table_warns_about_extrapolation() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[prescribe]\nr_max = 0.2\ntable_points = 50\n");
    let cfg = write_config(dir.path(), &body);
    run_ok(&cfg, "prescribe", &dir.path().join("field"));
    let sample_cfg = write_config(
        dir.path(),
        &format!("{SMALL}\n[field]\nkind = \"table\"\npath = \"field/field_table.csv\"\n"),
    );
    let o = run_ok(&sample_cfg, "sample", &dir.path().join("run"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let diag = json(&dir.path().join("run/diagnostics.json"));
    assert_eq!(diag["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn prescribed_field_sampling_uses_the_target_as_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[field]\nkind = \"prescribed\"\ntarget_radius = 1.0\nhinge = 2.0\n"));
    let out = dir.path().join("run");
    run_ok(&cfg, "sample", &out);
    let diag = json(&out.join("diagnostics.json"));
    assert_eq!(diag["equilibrium_support"][1].as_f64().unwrap(), 1.0);
}

#[test]
fn convergence_study_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[study]\nn_values = [12]\n"));
    let out = dir.path().join("study");
    run_ok(&cfg, "convergence-study", &out);
    let table = fs::read_to_string(out.join("study.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "N,ks,fm_distance,max_radius");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("12,"));
    assert!(out.join("N12/snapshot.csv").exists());

    let cfg = write_config(dir.path(), &format!("{SMALL}\n[study]\nn_values = [8, 16, 24]\n"));
    let out = dir.path().join("study3");
    run_ok(&cfg, "convergence-study", &out);
    let table = fs::read_to_string(out.join("study.csv")).unwrap();
    for line in table.lines().skip(1) {
        let fm: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=2.0).contains(&fm));
    }
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn riesz_kernel_has_no_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("kernel = \"coulomb\"", "kernel = \"riesz\"\nalpha = 1.5");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("run");
    run_ok(&cfg, "sample", &out);
    let diag = json(&out.join("diagnostics.json"));
    assert!(diag["ks"].is_null());
    assert!(diag["equilibrium_note"].is_string());
    let o = rieszgas(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("e").to_str().unwrap(), "equilibrium"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();

    let typo = write_config(dir.path(), &SMALL.replace("step_size", "stepsize"));
    let o = rieszgas(&["--config", typo.to_str().unwrap(), "--out", out, "sample"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stepsize"));

    let o = rieszgas(&["--config", dir.path().join("missing.toml").to_str().unwrap(), "sample"]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(rieszgas(&["sample"]).status.code(), Some(2));
    assert_eq!(rieszgas(&["frobnicate"]).status.code(), Some(2));

    // support of the target outside the hinge ball
    let bad = write_config(dir.path(), &format!("{SMALL}\n[prescribe]\ntarget_radius = 1.0\nhinge = 0.5\n"));
    assert_eq!(rieszgas(&["--config", bad.to_str().unwrap(), "--out", out, "prescribe"]).status.code(), Some(2));

    let hot = write_config(dir.path(), &SMALL.replace("beta = 1.0", "beta = 2.0"));
    assert_eq!(rieszgas(&["--config", hot.to_str().unwrap(), "--out", out, "prescribe"]).status.code(), Some(3));

    let flat = write_config(dir.path(), &SMALL.replace("dim = 3", "dim = 2"));
    assert_eq!(rieszgas(&["--config", flat.to_str().unwrap(), "--out", out, "equilibrium"]).status.code(), Some(3));

    let no_study = write_config(dir.path(), SMALL);
    assert_eq!(
        rieszgas(&["--config", no_study.to_str().unwrap(), "--out", out, "convergence-study"]).status.code(),
        Some(2)
    );
}

#[test]
fn shipped_configs_parse() {
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    run_ok(&configs.join("quadratic.toml"), "equilibrium", &dir.path().join("eq"));
    run_ok(&configs.join("prescribed.toml"), "prescribe", &dir.path().join("pre"));
}

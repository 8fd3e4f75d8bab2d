use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pepsgad-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pepsgad")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn check<'a>(rep: &'a Value, name: &str) -> &'a Value {
    rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn trivial_verify_passes_quickly() {
    let out = scratch("verify");
    let t = Instant::now();
    let o = run(&["verify"], &out);
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rep = report(&out);
    assert_eq!(rep["pass"], true);
    for c in rep["checks"].as_array().unwrap() {
        assert!(c.get("threshold").is_some() && c.get("comparison").is_some());
    }
    assert_eq!(rep["scenario"]["model"], "trivial");
}

#[test]
fn reports_are_bitwise_stable() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for d in [&a, &b] {
        assert_eq!(run(&["sweep", "--seed", "11"], d).status.code(), Some(0));
    }
    for f in ["report.json", "sweep.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let text = std::fs::read_to_string(a.join("report.json")).unwrap();
    assert!(text.contains("\"seed\": 11"));
    assert!(!text.contains("timings"));
}

#[test]
fn sweep_csv_has_the_fixed_header() {
    let out = scratch("csv");
    run(&["sweep", "--set", "epsilons=[0.04,0.02,0.01]"], &out);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,gap,fidelity,offdiag_residual,garbage_norm"));
    let fid: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(fid.len(), 3);
}

#[test]
fn config_errors_exit_with_two() {
    let out = scratch("cfg");
    let o = run(&["sweep", "--set", "epsilons=[]"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep", "--set", "epsilons=[0.02]"], &out);
    assert_eq!(o.status.code(), Some(2));
    // A single ε is fine once slopes are off.
    let o = run(&["sweep", "--set", "epsilons=[0.02]", "--set", "sweep.slopes=false"], &out);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "--set", "epsilons=[0.02,1.5]"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilons[1]"));
    let o = run(&["verify", "--set", "orders.nstar=3"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--set", "model=kagome"], &out);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model"));
}

#[test]
fn config_file_and_overrides_combine() {
    let out = scratch("file");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("scenario.json");
    std::fs::write(&cfg, r#"{"model": "trivial", "lattice": {"sites": 4}, "epsilons": [0.05, 0.01]}"#).unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--set", "lattice.sites=2"], &out);
    assert_eq!(o.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["scenario"]["lattice"]["sites"], 2);
    assert_eq!(rep["scenario"]["epsilons"].as_array().unwrap().len(), 2);
}

#[test]
fn oversized_toric_grid_is_a_resource_overrun() {
    let out = scratch("toric");
    let o = run(&["verify", "--set", "model=toric-code", "--set", "lattice.cols=3"], &out);
    assert_eq!(o.status.code(), Some(3));
    let rep = report(&out);
    assert!(rep["aborted"].as_str().unwrap().contains("limit"));
    assert_eq!(rep["pass"], false);
}

#[test]
fn comparisons_on_the_trivial_model() {
    let out = scratch("cmp");
    // Identity maps: H0 vanishes, so both series reduce to εV and agree exactly.
    assert_eq!(run(&["compare", "--set", "orders.n=1"], &out).status.code(), Some(0));
    assert_eq!(check(&report(&out), "compare.max_deviation")["value"], 0.0);
    assert_eq!(run(&["compare", "--set", "compare.against=global"], &out).status.code(), Some(0));
    assert_eq!(check(&report(&out), "compare.max_deviation")["value"], 0.0);
}

#[test]
fn custom_model_file_round_trips() {
    let out = scratch("custom");
    std::fs::create_dir_all(&out).unwrap();
    let model = pepsgad::peps::PepsModel::<f64>::identity_maps(pepsgad::lattice::chain(2).unwrap(), 2).unwrap();
    let mut v = model.to_maps_json();
    v["graph"] = model.graph.to_json();
    let path = out.join("model.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let o = run(&["verify", "--set", &format!("model={}", path.display()), "--set", "orders.n_star=1"], &out);
    assert_eq!(o.status.code(), Some(0), "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn corrupted_double_semion_fixture() {
    let out = scratch("corrupt");
    let o = run(&["verify", "--set", "model=double-semion", "--set", "fixture=corrupted", "--set", "orders.n_star=2"], &out);
    let rep = report(&out);
    // The phase flip keeps every map isometric on the single-cell torus.
    assert_eq!(check(&rep, "quasi_injectivity.failures")["value"], 0.0);
    assert_eq!(o.status.code(), Some(if rep["pass"] == true { 0 } else { 1 }));
    let o = run(&["verify", "--set", "model=toric-code", "--set", "fixture=corrupted"], &out);
    assert_eq!(o.status.code(), Some(2));
}

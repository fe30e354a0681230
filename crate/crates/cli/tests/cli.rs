use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use degsched::bench::{BENCH_HEADER, GAP_HEADER};
use degsched::oracle::sidecar_path;
use degsched::sched::{BESS_HEADER, COSTS_HEADER, DISPATCH_HEADER};

fn degsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degsched"))
        .args(args)
        .env_remove("DEGSCHED_SOLVER")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen_data(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("data.csv");
    let o = degsched(&["gen-data", "--samples", "1000", "--seed", "3", "--out", p(&data)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    data
}

fn train_net(dir: &Path, data: &Path, eps: &str) -> std::path::PathBuf {
    let net = dir.join(format!("net_{eps}.json"));
    let o = degsched(&[
        "train", "--data", p(data), "--mode", "cold", "--sparsity", eps, "--epochs", "3", "--out", p(&net),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    net
}

/// Three buses in a line with cheap power at one end, a load at the other and
/// a tight middle line.
const THREE_BUS: &str = r#"{
  "name": "three-bus",
  "buses": [1, 2, 3],
  "reference_bus": 1,
  "generators": [
    {"name": "cheap", "bus": 1, "p_min": 0, "p_max": 200, "ramp": 200, "cost": 10},
    {"name": "local", "bus": 3, "p_min": 0, "p_max": 200, "ramp": 200, "cost": 40}
  ],
  "lines": [
    {"name": "l12", "from": 1, "to": 2, "susceptance": 10, "limit": 500},
    {"name": "l23", "from": 2, "to": 3, "susceptance": 10, "limit": 60}
  ],
  "bess": [
    {"name": "b", "bus": 3, "energy_max": 40, "energy_initial": 20, "p_max": 10,
     "capital_cost": 8000, "salvage_value": 800}
  ],
  "loads": [
    {"bus": 3, "demand": [50,50,50,50,50,50,50,80,80,80,80,80,80,80,80,80,80,80,80,50,50,50,50,50]}
  ],
  "temperature": [25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25,25]
}"#;

#[test]
fn help_succeeds_and_bad_flags_are_usage_errors() {
    assert_eq!(code(&degsched(&["--help"])), 0);
    assert_eq!(code(&degsched(&["schedule", "--help"])), 0);
    assert_eq!(code(&degsched(&["schedule", "--colour", "blue"])), 1);
    assert_eq!(code(&degsched(&[])), 1);
}

#[test]
fn gen_data_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = degsched(&["gen-data", "--samples", "1000", "--seed", "9", "--out", p(out)]);
        assert_eq!(code(&o), 0);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), "soc_start,dod,temp_c,c_rate,soh,delta_soh");
    assert_eq!(text.lines().count(), 1001);
    assert!(sidecar_path(&a).is_file());

    let o = degsched(&["gen-data", "--samples", "0", "--out", p(&a)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn train_writes_net_log_and_accuracy_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let net = dir.path().join("warm.json");
    let o = degsched(&[
        "train", "--data", p(&data), "--mode", "warm", "--sparsity", "0.5", "--dense-epochs", "2", "--epochs", "2",
        "--sweep", "--out", p(&net),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("sparsity,acc_5,acc_10,acc_15,test_mse\n0.5,"));
    let loaded = degsched::net::SparseNet::load(&net).unwrap();
    assert_eq!(loaded.active_neurons(), 15);

    let log = fs::read_to_string(dir.path().join("warm.json.log.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "epoch,train_mse,test_mse,active_neurons");
    let epochs: Vec<usize> = log.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(epochs, vec![1, 2, 3, 4]);

    let acc = fs::read_to_string(dir.path().join("warm.json.accuracy.csv")).unwrap();
    assert_eq!(acc.lines().next().unwrap(), "sparsity,acc_5,acc_10,acc_15,test_mse");
    assert_eq!(acc.lines().count(), 10);
    for row in acc.lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[2] && v[2] <= v[3], "{row}");
    }
}

#[test]
fn train_rejects_out_of_range_sparsity() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let out = dir.path().join("n.json");
    for eps in ["0.97", "-0.1"] {
        let o = degsched(&["train", "--data", p(&data), "--sparsity", eps, "--out", p(&out)]);
        assert_eq!(code(&o), 1, "{eps}");
    }
    let o = degsched(&["train", "--data", p(&dir.path().join("missing.csv")), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn schedule_writes_tables_with_fixed_headers() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let net = train_net(dir.path(), &data, "0.5");
    let dense = train_net(dir.path(), &data, "0");
    let out = dir.path().join("run");
    let o = degsched(&[
        "schedule", "--case", "microgrid-1bess", "--net", p(&net), "--reference", p(&dense), "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first_line(&out.join("dispatch.csv")), DISPATCH_HEADER);
    assert_eq!(first_line(&out.join("bess.csv")), BESS_HEADER);
    assert_eq!(first_line(&out.join("costs.csv")), COSTS_HEADER);
    assert_eq!(DISPATCH_HEADER, "t,kind,name,commit,startup,power_mw");
    assert_eq!(BESS_HEADER, "t,name,soc,charge_mw,discharge_mw,dod,c_rate,bd");
    assert_eq!(COSTS_HEADER, "operation,bd_cost,pseudo_total,og_bd_cost,updated_total,objective");

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "optimal");
    assert_eq!(summary["violations"], 0);
    let (op, bd) = (summary["operation"].as_f64().unwrap(), summary["bd_cost"].as_f64().unwrap());
    let pseudo = summary["pseudo_total"].as_f64().unwrap();
    assert!((pseudo - op - bd).abs() <= 1e-6 * pseudo.abs());
    let og = summary["og_bd_cost"].as_f64().unwrap();
    assert!((summary["updated_total"].as_f64().unwrap() - op - og).abs() <= 1e-9 * pseudo.abs());
    assert!(!out.join("violations.txt").exists());
}

#[test]
fn schedule_needs_a_degradation_choice() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path());
    assert_eq!(code(&degsched(&["schedule", "--case", "microgrid-1bess", "--out", out])), 1);
    assert_eq!(code(&degsched(&["schedule", "--case", "no-such-case", "--no-degradation", "--out", out])), 1);
    let o = degsched(&["schedule", "--case", "microgrid-1bess", "--no-degradation", "--out", out]);
    assert_eq!(code(&o), 0);
}

#[test]
fn missing_external_solver_is_an_environment_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_degsched"))
        .args(["schedule", "--case", "microgrid-1bess", "--no-degradation", "--out", p(dir.path())])
        .env("DEGSCHED_SOLVER", "/nonexistent/solver")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn lmp_prints_bus_prices_and_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("three.json");
    fs::write(&case, THREE_BUS).unwrap();
    let out = dir.path().join("lmp");
    let o = degsched(&["lmp", "--case", p(&case), "--no-bess", "--bus", "3", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,lmp,congested");
    assert_eq!(text.lines().count(), 25);
    assert_eq!(first_line(&out.join("lmp.csv")), "t,bus,lmp,congested");
    assert_eq!(fs::read_to_string(out.join("lmp_bus3.csv")).unwrap(), text);
    // Off-peak the cheap unit sets the price; at peak the middle line binds.
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let price = |t: usize| rows[t][1].parse::<f64>().unwrap();
    assert!((price(0) - 10.0).abs() < 1e-6);
    assert!((price(10) - 40.0).abs() < 1e-6);
    assert_eq!(rows[10][2], "1");

    let o = degsched(&["lmp", "--case", p(&case), "--no-bess", "--bus", "7"]);
    assert_eq!(code(&o), 1);
    let o = degsched(&["lmp", "--case", "microgrid-1bess", "--no-bess", "--bus", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bench_reports_every_sparsity() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let dense = train_net(dir.path(), &data, "0");
    let out = dir.path().join("bench");
    let o = degsched(&[
        "bench", "--case", "microgrid-1bess", "--data", p(&data), "--dense", p(&dense), "--sparsities", "0.5,0.3",
        "--gaps", "0.01,0.001", "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(rows.lines().next().unwrap(), BENCH_HEADER.join(","));
    let eps: Vec<&str> = rows.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(eps, vec!["0.3", "0.5"]);
    assert_eq!(first_line(&out.join("gaps.csv")), GAP_HEADER.join(","));
    assert_eq!(fs::read_to_string(out.join("gaps.csv")).unwrap().lines().count(), 3);
    assert!(out.join("nets").join("net_0.5.json").is_file());
}

#[test]
fn config_file_supplies_options_relative_to_itself() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[gen-data]\nsamples = 1000\nseed = 4\nout = \"cfg.csv\"\n").unwrap();
    let o = degsched(&["--config", p(&cfg), "gen-data"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("cfg.csv")).unwrap().lines().count(), 1001);

    fs::write(&cfg, "[gen-data]\nsampels = 1000\n").unwrap();
    assert_eq!(code(&degsched(&["--config", p(&cfg), "gen-data"])), 1);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qdiscord::qmat::SubsystemLayout;
use qdiscord::states::file::density_to_json;
use qdiscord::states::random_state;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn qdiscord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiscord"))
        .args(args)
        .output()
        .expect("spawn qdiscord")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_random_state(dir: &TempDir, labels: &[&str], rank: usize, seed: u64) -> PathBuf {
    let rho = random_state(&SubsystemLayout::qubits(labels), rank, seed).unwrap();
    let path = dir.path().join(format!("random_{seed}.json"));
    std::fs::write(&path, density_to_json(&rho)).unwrap();
    path
}

#[test]
fn bell_discord_is_one() {
    let o = qdiscord(&["discord", data("bell.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!((field(&out, "discord ") - 1.0).abs() <= 1e-6);
    assert!(out.contains("optimal basis"));
    assert!(out.contains("optimizer"));
}

#[test]
fn product_discord_vanishes() {
    let o = qdiscord(&["discord", data("product.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "discord ").abs() <= 1e-6);
}

#[test]
fn werner_grid_check() {
    let o = qdiscord(&["--grid-check", "400x800", "discord", data("werner07.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let d = field(&out, "discord ");
    let g = field(&out, "grid 400x800 ");
    assert!((d - g).abs() <= 1e-4);
}

#[test]
fn fixed_basis_from_file() {
    let basis = format!("file:{}", data("hadamard_basis.json").display());
    let o = qdiscord(&["--basis", &basis, "discord", data("cc_state.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(field(&out, "discord ").abs() < 1e-6);
    let line = out.lines().find(|l| l.starts_with("discord in file")).unwrap();
    let fixed: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!(fixed > 0.3, "measuring cc in the Hadamard basis loses correlations: {fixed}");
}

#[test]
fn discord_csv_output() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("d.csv");
    let o = qdiscord(&["--csv", csv.to_str().unwrap(), "discord", data("bell.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&csv);
    assert_eq!(header[0], "discord");
    assert!((num(&rows[0][0]) - 1.0).abs() < 1e-6);
}

#[test]
fn non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let path = write_random_state(&dir, &["A", "B"], 4, 12);
    let o = qdiscord(&["--starts", "2", "discord", path.to_str().unwrap(), "--max-iters", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(qdiscord(&["discord", "/nonexistent/state.json"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"labels": ["A"], "dims": [2], "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
    assert_eq!(qdiscord(&["discord", bad.to_str().unwrap()]).status.code(), Some(2));
    let bell = data("bell.json");
    assert_eq!(
        qdiscord(&["--basis", "diagonal", "discord", bell.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(qdiscord(&["discord", bell.to_str().unwrap(), "--measured", "Z"]).status.code(), Some(2));
    assert_eq!(qdiscord(&["verify", "ssa", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(qdiscord(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn arity_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let three = write_random_state(&dir, &["A", "B", "C"], 2, 4);
    for protocol in ["mother", "fqswd", "qsm", "sdc", "ed"] {
        let o = qdiscord(&["budget", protocol, three.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{protocol}");
    }
}

#[test]
fn verify_suites_pass() {
    for (suite, trials) in [("ssa", "1000"), ("theorem1", "500"), ("losses", "200")] {
        let o = qdiscord(&["--seed", "7", "verify", suite, "--trials", trials]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stdout(&o));
        let out = stdout(&o);
        assert_eq!(field(&out, "failed "), 0.0);
        assert_eq!(field(&out, "passed ").to_string(), trials);
    }
}

#[test]
fn verify_violation_exits_1_with_seed() {
    let o = qdiscord(&["--tol", "-1", "verify", "ssa", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL trial 0 seed "));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offending seed"));
}

#[test]
fn mother_budget_of_bell() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let o = qdiscord(&[
        "--csv",
        csv.to_str().unwrap(),
        "budget",
        "mother",
        data("bell_with_trivial_R.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&csv);
    assert_eq!(header[3], "qubit_channel_rate");
    assert!(num(&rows[0][3]).abs() < 1e-9);
    assert!((num(&rows[0][5]) - 1.0).abs() < 1e-9);
}

#[test]
fn merging_budget_of_classical_state() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let o = qdiscord(&["--csv", csv.to_str().unwrap(), "budget", "qsm", data("cc_state.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&csv);
    assert_eq!(rows[0][1], "before");
    assert!(num(&rows[0][3]).abs() < 1e-9);
    assert!((num(&rows[0][4]) - 1.0).abs() < 1e-9);
}

#[test]
fn distillation_loss_equals_discord() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let w = data("werner07.json");
    let o = qdiscord(&["--optimize", "--csv", csv.to_str().unwrap(), "budget", "ed", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&csv);
    let optimized = rows.iter().find(|r| r[2] == "optimized").unwrap();
    let d = field(&stdout(&qdiscord(&["discord", w.to_str().unwrap()])), "discord ");
    assert!((num(&optimized[6]) - d).abs() <= 1e-5);
    let out = stdout(&o);
    assert!(out.contains("loss (computational)") && out.contains("loss (optimized)"));
}

#[test]
fn every_protocol_reports_on_bell() {
    let bell = data("bell.json");
    for protocol in ["fqswd", "qsm", "sdc", "ed"] {
        let o = qdiscord(&["budget", protocol, bell.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{protocol}");
        assert!((field(&stdout(&o), "loss (computational) ") - 1.0).abs() < 1e-6);
    }
}

#[test]
fn werner_sweep_endpoints() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let o = qdiscord(&["sweep", "werner", "--grid", "0:0.1:1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(
        header,
        [
            "seed",
            "family",
            "params",
            "discord",
            "merging_markup",
            "dense_coding_loss",
            "distillation_loss",
            "ssa_min_slack",
            "residual_max"
        ]
    );
    assert_eq!(rows.len(), 11);
    assert!(num(&rows[0][8]) <= 1e-6);
    assert!(num(&rows[10][8]) <= 1e-6);
    assert_eq!(rows[3][2], "3.00000000e-1");
}

#[test]
fn random_sweep_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |p: &Path, extra: &[&str]| {
        let mut args = vec!["--seed", "5"];
        args.extend_from_slice(extra);
        args.extend(["sweep", "random", "--trials", "100", "--out", p.to_str().unwrap()]);
        qdiscord(&args)
    };
    assert_eq!(run(&a, &[]).status.code(), Some(0));
    assert_eq!(run(&b, &["--sequential"]).status.code(), Some(0));
    let (bytes_a, bytes_b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(bytes_a, bytes_b);
    let (_, rows) = read_csv(&a);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| num(&r[8]) <= 1e-5));
}

#[test]
fn sweep_to_unwritable_path_exits_2() {
    let o = qdiscord(&["sweep", "werner", "--grid", "0.5", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

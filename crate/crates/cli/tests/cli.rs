use std::path::Path;
use std::process::{Command, Output};

fn binmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binmix")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const DATA: &str = "successes,trials\n3,10\n5,12\n7,20\n2,9\n11,30\n0,4\n4,4\n";

fn error_code(o: &Output) -> i64 {
    let line = String::from_utf8_lossy(&o.stderr);
    let last = line.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(last).unwrap();
    assert!(v["message"].is_string());
    v["code"].as_i64().unwrap()
}

#[test]
fn estimate_on_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", DATA);
    let o = binmix(&["estimate", "--input", &input, "--h", "0.1", "--grid", "0.1:0.9:0.1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "u,estimate"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 9);
    assert!(rows[0].starts_with("0.1,"));
    assert!(rows[8].starts_with("0.9,"));
    for key in ["# binmix ", "# command: estimate", "# args: ", "# seed: none"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "missing {key}");
    }
    let diag = String::from_utf8_lossy(&o.stderr);
    assert!(diag.contains("n=7"), "{diag}");
}

#[test]
fn ci_columns_and_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", DATA);
    let o = binmix(&["ci", "--input", &input, "--h", "0.3", "--point", "0.3", "--point", "0.6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "u,estimate,se,ci_lo,ci_hi"));
    for row in data_rows(&text) {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(v[3] <= v[1] && v[1] <= v[4]);
        assert!(v[2] >= 0.0);
    }
}

#[test]
fn lepski_singleton_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", DATA);
    let o = binmix(&["lepski", "--input", &input, "--grid-h", "0.25", "--seed", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["selected_h"], 0.25);
    assert_eq!(v["trace"][0]["rejected"], false);
    assert_eq!(v["meta"]["seed"], 1);
}

#[test]
fn bernstein_check_rows_pass() {
    let o = binmix(&[
        "bernstein-check", "--density", "beta:2,2", "--t-grid", "10,50", "--h-grid", "0.1,0.2",
        "--u-grid", "0.5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn diff_with_fixed_tuning() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("successes,trials,group\n");
    for i in 0..40u64 {
        body.push_str(&format!("{},{},{}\n", i % 17, 20, i % 2));
    }
    let input = write(dir.path(), "g.csv", &body);
    let o = binmix(&[
        "diff", "--input", &input, "--tune", "none", "--h", "0.4", "--kernel-order", "2", "--grid", "0.2,0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "u,tau_hat"));
    assert_eq!(data_rows(&text).len(), 2);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let header = write(dir.path(), "h.csv", "successes,trials\n");
    let o = binmix(&["estimate", "--input", &header, "--h", "0.2", "--grid", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no data rows"));

    let bad = write(dir.path(), "b.csv", "successes,trials\n3,10\n12,10\n");
    let o = binmix(&["estimate", "--input", &bad, "--h", "0.2", "--grid", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"));

    let missing = write(dir.path(), "m.csv", "x,t\n3,10\n");
    let o = binmix(&["estimate", "--input", &missing, "--h", "0.2", "--grid", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", DATA);
    for args in [
        vec!["estimate", "--input", input.as_str(), "--h", "0", "--grid", "0.5"],
        vec!["estimate", "--input", input.as_str(), "--h", "0.2", "--grid", "0:1.5:0.5"],
        vec!["lepski", "--input", input.as_str(), "--grid-h", "0.2,0.1"],
        vec!["sim1", "--n", "20"],
        vec!["no-such-command"],
    ] {
        let o = binmix(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(error_code(&o), 1);
    }
}

#[test]
fn out_file_written_atomically_and_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", DATA);
    let out = dir.path().join("est.csv");
    let args = ["estimate", "--input", &input, "--h", "0.2", "--grid", "0.2:0.8:0.2"];
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert!(binmix(&with_out).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&binmix(&args)));
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 2);
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let header = write(dir.path(), "h.csv", "successes,trials\n");
    let out = dir.path().join("never.csv");
    let o = binmix(&["estimate", "--input", &header, "--h", "0.2", "--grid", "0.5", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn simulation_config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "n = 40\ntargets = [20, 30]\nreplications = 5\nseed = 9\n");
    let a = binmix(&["sim1", "--config", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = binmix(&["sim1", "--n", "40", "--targets", "20,30", "--replications", "5", "--seed", "9"]);
    assert_eq!(data_rows(&stdout(&a)), data_rows(&stdout(&b)));
    assert_eq!(data_rows(&stdout(&a)).len(), 4);
    let bad = write(dir.path(), "bad.toml", "n = 40\nunknown = 1\n");
    assert_eq!(binmix(&["sim1", "--config", &bad, "--seed", "1"]).status.code(), Some(1));
}

#[test]
fn coverage_json_output() {
    let o = binmix(&[
        "coverage", "--n", "60", "--t", "200", "--h", "0.15", "--replications", "30", "--seed", "2",
        "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = v["rows"][0]["coverage"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&c));
    assert_eq!(v["meta"]["seed"], 2);
}

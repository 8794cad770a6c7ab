use std::path::Path;
use std::process::{Command, Output};

fn qarch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qarch")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn run_to(path: &Path, args: &[&str]) {
    let mut all = args.to_vec();
    all.extend(["-o", path.to_str().unwrap()]);
    let o = qarch(&all);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn spam_run_writes_two_records() {
    let o = qarch(&["run", "spam", "--backend", "ibm-melbourne", "--shots", "100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.contains("\"shots\":100")));
}

#[test]
fn bv_weights_give_one_record_each() {
    let o = qarch(&["run", "bv", "--n", "10", "--weights", "0..10", "--shots", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 11);
}

#[test]
fn usage_errors_exit_with_two() {
    let o = qarch(&["run", "spam", "--backend", "dwave"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown backend"));
    for args in [
        &["run", "swap-chain", "--grid", "5..1"][..],
        &["run", "swap-chain", "--grid", "a,b"],
        &["run", "teleport"],
        &["run", "spam", "--coherent-axis", "QQ"],
        &["run", "spam", "--weights", "1"],
    ] {
        assert_eq!(qarch(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(qarch(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn fit_prints_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let swaps = dir.path().join("swap.jsonl");
    run_to(&swaps, &["run", "swap-chain", "--backend", "ionq", "--grid", "1..4", "--shots", "2048"]);
    let o = qarch(&["fit", swaps.to_str().unwrap(), "--model", "linear"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("linear"));

    let chain = dir.path().join("chain.jsonl");
    run_to(&chain, &["run", "cnot-chain", "--backend", "ibm-melbourne", "--shots", "1024"]);
    let o = qarch(&["fit", chain.to_str().unwrap(), "--model", "gaussian"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("gaussian"));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = qarch(&["fit", empty.to_str().unwrap(), "--model", "linear"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(qarch(&["fit", swaps.to_str().unwrap(), "--model", "cubic"]).status.code(), Some(2));
}

#[test]
fn plot_draws_each_backend() {
    let dir = tempfile::tempdir().unwrap();
    let mut all = String::new();
    for b in ["ionq", "ibm-melbourne", "rigetti-aspen8"] {
        let p = dir.path().join(format!("{b}.jsonl"));
        run_to(&p, &["run", "swap-chain", "--backend", b, "--grid", "1..4", "--shots", "256"]);
        all += &std::fs::read_to_string(&p).unwrap();
    }
    let recs = dir.path().join("all.jsonl");
    std::fs::write(&recs, &all).unwrap();
    let svg = dir.path().join("out.svg");
    let o = qarch(&["plot", recs.to_str().unwrap(), "-o", svg.to_str().unwrap(), "--fit", "linear"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<g id=\"series-").count(), 3);

    let zero = dir.path().join("zero.jsonl");
    let line = all.lines().next().unwrap();
    let shots = line.split("\"shots\":").nth(1).unwrap().split(',').next().unwrap();
    let successes = line.split("\"successes\":").nth(1).unwrap().split(',').next().unwrap();
    let broken = line
        .replace(&format!("\"shots\":{shots}"), "\"shots\":0")
        .replace(&format!("\"successes\":{successes}"), "\"successes\":0");
    std::fs::write(&zero, broken + "\n").unwrap();
    let o = qarch(&["plot", zero.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no shots"));
}

#[test]
fn config_dir_overrides_presets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("ibm-vigo-5.toml"),
        "name = \"ibm-vigo\"\ntopology = \"ibm-vigo-5\"\nnative = \"zx\"\n[spam]\np_read_0 = 1.0\np_read_1 = 0.0\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qarch"))
        .args(["run", "spam", "--backend", "ibm-vigo", "--shots", "50", "--grid", "0"])
        .env("QARCH_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"successes\":0"));
}

#[test]
fn topology_info_reports_degrees() {
    let o = qarch(&["topology-info", "ibm-vigo-5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("qubits 5"));
    assert!(text.contains("degrees 1 3 1 2 1"));
    assert!(qarch(&["topology-info", "ionq-11"]).status.success());
    assert_eq!(qarch(&["topology-info", "/no/such/file"]).status.code(), Some(2));
}

#[test]
fn calibrate_prints_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vigo.toml");
    let o = qarch(&[
        "calibrate", "--backend", "ibm-vigo", "--slope", "0.05", "--shots", "1024", "-o",
        cfg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = qarch(&["run", "spam", "--config", cfg.to_str().unwrap(), "--shots", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(qarch(&["calibrate", "--backend", "ibm-vigo"]).status.code(), Some(2));
}

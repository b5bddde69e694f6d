use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ibfd-dcf"));
    cmd.env_remove("IBFD_DCF_CONFIG");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn solve_prints_a_row_per_node_count() {
    let out = run(&["solve", "--sweep", "2,6,10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for n in ["2", "6", "10"] {
        assert!(text.lines().any(|l| l.split_whitespace().any(|w| w == n)), "{text}");
    }
}

#[test]
fn solve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.csv");
    let out = run(&["solve", "--duplex", "hd", "--n", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("experiment,variant,n,metric,analytical,sim_mean,sim_stderr,rel_err"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn oracle_agrees() {
    let out = run(&["oracle", "--p", "0.4", "--beta", "0.2", "--windows", "4,8"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn simulate_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "simulate",
            "--n",
            "5",
            "--aggregation",
            "multi",
            "--rho",
            "uniform:0.1:0.9:step0.1",
            "--runs",
            "3",
            "--events",
            "20000",
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 4);

    let c = dir.path().join("c.csv");
    let out = run(&[
        "simulate", "--n", "5", "--runs", "3", "--events", "20000", "--seed", "12", "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_ne!(first, fs::read(&c).unwrap());
}

const EXPERIMENT: &str = r#"
[experiment]
name = "tiny"
sweep = [2, 4]
runs = 2
events = 5000
seed = 3
plot = "throughput"
variants = [
  { label = "hd", duplex = "hd", rho = "deterministic:0.3" },
  { label = "multi", duplex = "ibfd", aggregation = "multi", rho = "deterministic:0.3" },
]
"#;

fn experiment_outputs(dir: &Path, config: &Path, via_env: bool) -> Vec<u8> {
    let out_dir = dir.join(if via_env { "env" } else { "file" });
    let mut cmd = bin();
    if via_env {
        cmd.env("IBFD_DCF_CONFIG", config).args(["experiment", "tiny"]);
    } else {
        cmd.args(["experiment", config.to_str().unwrap()]);
    }
    let out = cmd.args(["--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("tiny_plot").join("tiny.dat").is_file());
    assert!(out_dir.join("tiny_plot").join("tiny_sim.dat").is_file());
    fs::read(out_dir.join("tiny.csv")).unwrap()
}

#[test]
fn experiment_from_file_and_from_env_config_match() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    fs::write(&config, EXPERIMENT).unwrap();
    let from_file = experiment_outputs(dir.path(), &config, false);
    let from_env = experiment_outputs(dir.path(), &config, true);
    assert_eq!(from_file, from_env);
    // header + 2 variants x 2 node counts x 2 metrics
    assert_eq!(String::from_utf8_lossy(&from_file).lines().count(), 9);
}

#[test]
fn builtin_table_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["experiment", "table3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("table3.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 18 * 2);
    assert!(text.contains("table3,multi/rho=0.1,0,exp_gamma,10,,,"), "{text}");
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["solve", "--n", "1"][..],
        &["solve", "--rho", "deterministic:2"],
        &["simulate", "--duplex", "hd", "--aggregation", "dual"],
        &["experiment", "fig99"],
        &["oracle", "--p", "1.5"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[scenario]\nduplex = \"simplex\"\n").unwrap();
    let out = run(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn io_errors_exit_4() {
    let out = run(&["solve", "--config", "/nonexistent/ibfd.toml"]);
    assert_eq!(code(&out), 4);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("out.csv");
    let out = run(&["solve", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
}

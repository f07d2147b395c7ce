use std::path::Path;
use std::process::{Command, Output};

fn ftcluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftcluster"))
        .args(args)
        .env_remove("FTCLUSTER_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_deterministic_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = [
        "simulate", "--gadget", "hexa", "--level", "2", "--pe", "0.001", "--trials", "300", "--seed", "42",
    ];
    let mut args_a = base.to_vec();
    args_a.extend(["--jobs", "1", "--out", path_str(&a)]);
    let mut args_b = base.to_vec();
    args_b.extend(["--jobs", "3", "--out", path_str(&b)]);
    assert!(ftcluster(&args_a).status.success());
    assert!(ftcluster(&args_b).status.success());
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ftcluster"));
        c.args([
            "simulate",
            "--gadget",
            "cz_single",
            "--pe",
            "0.01",
            "--trials",
            "200",
        ])
        .args(extra);
        match env {
            Some(v) => c.env("FTCLUSTER_SEED", v),
            None => c.env_remove("FTCLUSTER_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    let from_env = run(Some("7"), &[]);
    assert!(from_env.lines().nth(1).unwrap().ends_with(",7"));
    assert_eq!(from_env, run(None, &["--seed", "7"]));
    assert_eq!(from_env, run(Some("3"), &["--seed", "7"]));
}

#[test]
fn noiseless_rows_accept_everything() {
    let o = ftcluster(&["simulate", "--gadget", "cz_double", "--pe", "0", "--trials", "50"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "cz_double");
    assert_eq!(row[4], "50");
    assert_eq!(row[5], "1.0");
    assert_eq!(row[8], "0.0");
}

#[test]
fn unknown_gadget_is_a_usage_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = ftcluster(&["simulate", "--gadget", "nosuch", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown gadget `nosuch`"));
    assert!(!out.exists());
}

#[test]
fn fast_mode_at_level_one_is_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = ftcluster(&[
        "simulate",
        "--gadget",
        "hexa",
        "--level",
        "2",
        "--mode",
        "fast",
        "--trials",
        "0",
        "--out",
        path_str(&out),
    ]);
    assert!(!o.status.success());
    let o = ftcluster(&[
        "simulate",
        "--gadget",
        "cz_single",
        "--level",
        "1",
        "--mode",
        "fast",
        "--out",
        path_str(&out),
    ]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn threshold_lines() {
    let o = ftcluster(&["threshold"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("D=17/15 p_th=0.0420"));

    let o = ftcluster(&["threshold", "--D", "1"]);
    assert!(stdout(&o).contains("p_th exact=1/21 (0.04762)"));

    let o = ftcluster(&["threshold", "--tau-m", "0.1", "--n-steps", "10", "--N", "1e20"]);
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("memory"))
        .unwrap()
        .to_string();
    let p: f64 = line.split("p_th=").nth(1).unwrap()[..6].parse().unwrap();
    assert!((0.0085..=0.0100).contains(&p), "{line}");
}

#[test]
fn empirical_search_without_a_crossing_is_an_error() {
    let o = ftcluster(&[
        "threshold",
        "--empirical",
        "--p-lo",
        "0.001",
        "--p-hi",
        "0.002",
        "--trials",
        "200",
        "--steps",
        "1",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("do not cross"));
}

#[test]
fn resources_rows() {
    let o = ftcluster(&["resources", "--success-table", "unit", "--N", "1e6"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("l_bar"), "2");
    assert_eq!(col("R_h"), "2623.0");

    let o = ftcluster(&["resources", "--success-table", "unit"]);
    let out = stdout(&o);
    let rows: Vec<Vec<String>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    for w in rows.windows(2) {
        let (l0, l1): (u32, u32) = (w[0][2].parse().unwrap(), w[1][2].parse().unwrap());
        let (r0, r1): (f64, f64) = (w[0][3].parse().unwrap(), w[1][3].parse().unwrap());
        assert!(r1 >= r0);
        assert_eq!(l0 == l1, r0 == r1);
    }
}

#[test]
fn resources_input_errors() {
    let o = ftcluster(&["resources", "--N", "1e6"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing success table below level 3"));

    let dir = tempfile::tempdir().unwrap();
    let overlay = dir.path().join("overlay.csv");
    std::fs::write(&overlay, "N,R\n1e10,500\n1e20,oops\n").unwrap();
    let o = ftcluster(&[
        "resources",
        "--success-table",
        "unit",
        "--overlay",
        path_str(&overlay),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(
        std::fs::read_to_string(&overlay).unwrap(),
        "N,R\n1e10,500\n1e20,oops\n"
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# sample\ngadget = cz_single\npe = 0.01\ntrials = 100\nseed = 5\n",
    )
    .unwrap();
    let o = ftcluster(&["simulate", "--config", path_str(&cfg), "--trials", "120"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("cz_single,1,0.01,120,"), "{row}");
    assert!(row.ends_with(",5"));

    std::fs::write(&cfg, "gadget = cz_single\ncolour = red\n").unwrap();
    let o = ftcluster(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key `colour`"));
}

#[test]
fn sweep_writes_one_file_with_a_grid_column() {
    let o = ftcluster(&[
        "sweep",
        "--gadget",
        "cz_single",
        "--grid",
        "0.001,0.003,0.01",
        "--trials",
        "200",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["p_e"], 0.01);
}

#[test]
fn oracle_check_quick_passes_and_catches_a_bad_phase() {
    let o = ftcluster(&["oracle-check", "--quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);

    let o = ftcluster(&["oracle-check", "--quick", "--corrupt-phase"]);
    assert!(!o.status.success());
    let out = stdout(&o);
    assert!(out.contains("FAIL tableau vs state vector: stabilizer expectation (phase convention)"));
    assert!(out.contains("reproduce: seed="));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quasineutral::io::{read_rate_csv, read_run_csv};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasineutral"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

const SMALL: [&str; 6] = [
    "--set",
    "grid_n=16",
    "--set",
    "final_time=0.05",
    "--set",
    "epsilon_list=0.2,0.1,0.05",
];

#[test]
fn ma_check_passes_and_writes_rates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ma-check", "--set", "grid_n=32"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["passed"], true);
    assert_eq!(s["config"]["grid_n"], 32);
    let fits = read_rate_csv(&dir.path().join("ma-check_seed1_rates.csv")).unwrap();
    assert!(fits[0].slope_within(1.8, 2.2));
}

#[test]
fn euler_run_is_named_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["euler", "--set", "seed=4"];
    args.extend(SMALL);
    let o = run(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let samples = read_run_csv(&dir.path().join("euler_euler_seed4.csv")).unwrap();
    assert!(samples.len() > 2);
    assert!(samples.iter().all(|s| s.err_v_hs < 1e-9));
    assert_eq!(summary(dir.path())["runs"][0]["status"], "complete");
}

#[test]
fn sweep_writes_one_file_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["convergence", "--set", "coupling=both"];
    args.extend(SMALL);
    let o = run(&args, dir.path());
    let s = summary(dir.path());
    // short runs need not reach the asymptotic rates; the exit code must agree with the summary
    assert_eq!(o.status.success(), s["passed"] == true);
    assert_eq!(o.status.code() == Some(1), s["passed"] == false);
    for coupling in ["poisson", "monge-ampere"] {
        for eps in ["0.2", "0.1", "0.05"] {
            let name = format!("convergence_eps{eps}_{coupling}_seed1.csv");
            assert!(
                !read_run_csv(&dir.path().join(&name)).unwrap().is_empty(),
                "{name}"
            );
        }
        let rates = read_rate_csv(
            &dir.path()
                .join(format!("convergence_{coupling}_seed1_rates.csv")),
        )
        .unwrap();
        assert_eq!(rates.len(), 2);
        assert_eq!(rates[0].points.len(), 3);
    }
    assert_eq!(s["runs"].as_array().unwrap().len(), 6);
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    fs::write(&cfg, "# small\ngrid_n = 16\nseed = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = run(
        &[
            "ma-check",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "seed=5",
        ],
        &out,
    );
    assert!(o.status.success());
    let s = summary(&out);
    assert_eq!(s["config"]["grid_n"], 16);
    assert_eq!(s["config"]["seed"], 5);
}

#[test]
fn bad_input_exits_with_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "grid_n = 16\nfoo = 1\n").unwrap();
    let o = run(&["ep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&["ep", "--set", "epsilon_list=0.2,0.1,-0.05"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon_list"));

    let o = run(&["ep", "--set", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["plasma"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn study_errors_still_leave_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["ep", "--set", "grid_n=16", "--set", "epsilon_list=0.2,0.1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let s = summary(dir.path());
    assert_eq!(s["passed"], false);
    assert_eq!(s["failures"][0]["kind"], "error");
}

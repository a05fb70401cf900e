use std::path::Path;
use std::process::{Command, Output};

use rbfmix::engine::RunSummary;

fn rbfmix(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbfmix"))
        .args(args)
        .env("RBFMIX_OUT", out)
        .output()
        .expect("binary runs")
}

const BRANIN: &str = r#"{
  "continuous": [{"lower": -5, "upper": 10}, {"lower": 0, "upper": 15}],
  "objective": "branin"
}"#;

#[test]
fn solve_branin() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("branin.json");
    std::fs::write(&file, BRANIN).unwrap();
    let out = dir.path().join("run");
    let o = rbfmix(&["solve", file.to_str().unwrap(), "--budget", "150", "--seed", "1"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = RunSummary::load_json(&out.join("summary.json")).unwrap();
    assert!(summary.best_value.unwrap() <= 0.41, "{summary:?}");
    assert_eq!(summary.evaluations, 150);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains(&format!("best value: {}", summary.best_value.unwrap())), "{stdout}");

    // The summary reproduces the best row of the trace exactly.
    let rows = rbfmix::engine::read_trace_csv(&out.join("trace.csv")).unwrap();
    let best = rows.iter().map(|r| r.f).fold(f64::INFINITY, f64::min);
    assert_eq!(best, summary.best_value.unwrap());
    let again = RunSummary::load_json(&out.join("summary.json")).unwrap();
    assert_eq!(again, summary);
}

#[test]
fn malformed_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, "{\n  \"continuous\": [{\"lower\": 0, \"uper\": 1}],\n  \"objective\": \"x\"\n}").unwrap();
    let o = rbfmix(&["solve", file.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("uper"), "{err}");

    let o = rbfmix(&["solve", dir.path().join("missing.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbfmix(&["solve", "x.json", "--bugdet", "3"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn simulated_parallel_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, BRANIN).unwrap();
    let mut traces = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = rbfmix(
            &[
                "solve",
                file.to_str().unwrap(),
                "--threads",
                "4",
                "--simulate-latency",
                "lognormal:3,0.5,300",
                "--budget",
                "40",
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn abort_exits_2() {
    // Three feasible points and nothing else: the optimizer runs out of new
    // points and gives up after its restarts.
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tiny.json");
    std::fs::write(&file, r#"{"integer": [{"lower": 0, "upper": 2}], "objective": "awk '{print $1}'"}"#).unwrap();
    let o = rbfmix(&["solve", file.to_str().unwrap(), "--budget", "20"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn file_options_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("opt.json");
    std::fs::write(
        &file,
        r#"{"continuous": [{"lower": -5, "upper": 10}, {"lower": 0, "upper": 15}],
            "objective": "branin", "options": {"budget": 12, "rbf": "cubic"}}"#,
    )
    .unwrap();
    let out = dir.path().join("a");
    assert!(rbfmix(&["solve", file.to_str().unwrap()], &out).status.success());
    assert_eq!(RunSummary::load_json(&out.join("summary.json")).unwrap().evaluations, 12);
    let out = dir.path().join("b");
    assert!(rbfmix(&["solve", file.to_str().unwrap(), "--budget", "14"], &out).status.success());
    assert_eq!(RunSummary::load_json(&out.join("summary.json")).unwrap().evaluations, 14);
}

#[test]
fn list_instances() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["list-instances"][..], &["--list-instances"][..]] {
        let o = rbfmix(args, dir.path());
        assert!(o.status.success());
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(text.lines().any(|l| l == "branin"));
        assert!(text.lines().any(|l| l == "branin_cat"));
    }
}

#[test]
fn bench_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    std::fs::write(
        &suite,
        r#"{"instances": ["branin"],
            "algorithms": [{"name": "msrsm"}, {"name": "gutmann", "algorithm": "gutmann", "subsolver": "sampling"}]}"#,
    )
    .unwrap();
    let out = dir.path().join("bench");
    let o = rbfmix(
        &["bench", "run", "--suite", suite.to_str().unwrap(), "--seeds", "2", "--tau", "1e-1,1e-2", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.json").exists());
    assert!(out.join("traces/branin__msrsm__s1.csv").exists());
    for f in ["data_tau0.1.csv", "data_tau0.01.svg", "perf_tau0.01.csv", "perf_tau0.1.svg"] {
        assert!(out.join("profiles").join(f).exists(), "{f}");
    }
}

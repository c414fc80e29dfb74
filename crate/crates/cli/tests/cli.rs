use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fmtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmtx")).args(args).env_remove("FMTX_OUT").output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_default_suites_exit_zero() {
    let o = fmtx(&["verify"]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{out}{}", stderr(&o));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{out}");
}

#[test]
fn scenario_and_preset_conflict() {
    let s = scenario("crossing.json");
    let o = fmtx(&["plan", "--scenario", s.to_str().unwrap(), "--preset", "ao-disk"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("cannot be used with"), "{}", stderr(&o));
}

#[test]
fn plan_needs_a_source() {
    let o = fmtx(&["plan", "--seed", "1"]);
    assert!(!o.status.success());
}

#[test]
fn plan_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("crossing.json");
    let mut traces = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = fmtx(&["plan", "--scenario", s.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap(), "--no-timing"]);
        assert!(o.status.success(), "{}", stderr(&o));
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let text = String::from_utf8(traces.remove(0)).unwrap();
    assert_eq!(text.lines().next().unwrap(), "trial,iter,t_now,replan_ms,n_aff,n_c,k,coll_checks,c_robot,path_len,outcome");
    assert!(text.lines().count() > 2);
}

#[test]
fn seed_changes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("crossing.json");
    let mut traces = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        let o = fmtx(&["plan", "--scenario", s.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap(), "--no-timing"]);
        assert!(o.status.success(), "{}", stderr(&o));
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
    }
    assert_ne!(traces[0], traces[1]);
}

fn summary_rows(dir: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    let mut lines = text.lines().map(str::to_owned);
    assert_eq!(lines.next().unwrap(), "space,n,c_mult,obstacles,trials,median_ms,std_ms,success_rate");
    lines.collect()
}

#[test]
fn bench_geo_grid_reduced_samples_has_one_row_per_condition() {
    // same grid with the sample count pinned low so the run stays short
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = fmtx(&["bench", "--preset", "geo-grid", "--trials", "3", "--samples", "150", "--out", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 36);
    assert!(rows.iter().all(|r| r.starts_with("euclid2d,150,") && r.split(',').nth(4) == Some("3")), "{rows:?}");
    assert_eq!(std::fs::read_dir(dir.path().join("traces")).unwrap().count(), 36);
}

#[test]
#[ignore = "full-size grid, takes hours on one core"]
fn bench_geo_grid_has_36_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = fmtx(&["bench", "--preset", "geo-grid", "--trials", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(summary_rows(dir.path()).len(), 36);
}

#[test]
fn bench_scenario_file_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("crossing.json");
    let d = dir.path().to_str().unwrap();
    let o = fmtx(&["bench", "--scenario", s.to_str().unwrap(), "--trials", "2", "--c-mult", "2.0", "--out", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(&fields[..5], &["euclid2d", "600", "2.0", "3", "2"]);
}

#[test]
fn malformed_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(scenario("crossing.json")).unwrap().replace("\"c_mult\": 1.5", "\"c_mult\": \"big\"");
    std::fs::write(&bad, text).unwrap();
    let o = fmtx(&["plan", "--scenario", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("c_mult"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_fails() {
    let o = fmtx(&["bench", "--preset", "nope"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nope"), "{}", stderr(&o));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("crossing.json");
    let o = Command::new(env!("CARGO_BIN_EXE_fmtx"))
        .args(["plan", "--scenario", s.to_str().unwrap(), "--samples", "200"])
        .env("FMTX_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("trace.csv").exists());
}

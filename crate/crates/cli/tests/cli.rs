use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn invfilt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invfilt"))
        .args(args)
        .env_remove("INVFILT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn zeros_of_first_case() {
    let o = invfilt(&["zeros", config("case1.json").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1.500000"), "{text}");
    assert!(text.contains("NonMinimumPhase"));
}

#[test]
fn check_passes_on_first_case() {
    let o = invfilt(&["check", config("case1.json").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("assumptions hold"));
}

#[test]
fn design_places_requested_poles() {
    let cfg = config("case1.json");
    let o = invfilt(&["design", cfg.to_str().unwrap(), "--theta", "0.3", "--poles", "-0.2,0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("closed-loop spectrum: [-0.200000, 0.250000]"), "{text}");
    assert!(text.contains("K1 (2x2)"));
}

#[test]
fn simulate_writes_converged_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = invfilt(&["simulate", config("case1.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("k,y_1,truth_1,est_1,abs_err_1\n"));
    let err: f64 = csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(err < 1e-6);
}

#[test]
fn case_run_writes_one_file_per_design() {
    let dir = tempfile::tempdir().unwrap();
    let o = invfilt(&["case", "1", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 2);
}

#[test]
fn sweep_lists_every_angle() {
    let o = invfilt(&["sweep-theta", config("case1.json").to_str().unwrap(), "--from", "0.1", "--to", "1.2", "--steps", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"A\": [[1]").unwrap();
    assert_eq!(invfilt(&["zeros", bad.to_str().unwrap()]).status.code(), Some(2));

    let cfg = config("case1.json");
    let o = invfilt(&["design", cfg.to_str().unwrap(), "--theta", "0"]);
    assert_eq!(o.status.code(), Some(3));

    let unwritable = dir.path().join("missing").join("trace.csv");
    let o = invfilt(&["simulate", cfg.to_str().unwrap(), "--out", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn seed_from_environment() {
    let cfg = config("case1.json");
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_invfilt"));
        c.args(["sweep-theta", cfg.to_str().unwrap(), "--from", "0.5", "--to", "0.5", "--steps", "1"]);
        match seed {
            Some(s) => c.env("INVFILT_SEED", s),
            None => c.env_remove("INVFILT_SEED"),
        };
        c.output().unwrap()
    };
    assert!(run(Some("11")).status.success());
    let o = run(Some("not-a-number"));
    assert_eq!(o.status.code(), Some(2));
}

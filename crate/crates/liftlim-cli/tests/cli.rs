//! End-to-end runs of the installed binary: exit codes, the horizon
//! environment variable, and byte determinism of reports.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_liftlim"));
    // keep the ambient environment from leaking a default horizon into tests
    c.env_remove("LIFTLIM_DEFAULT_HORIZON");
    c
}

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect()
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process was signalled")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is not utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is not utf-8")
}

#[test]
fn verdict_commands_exit_zero() {
    let out = bin().arg("classify").arg(example("dyadic-solenoid.lift")).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("classify: strict lifting space"));
}

#[test]
fn malformed_spec_exits_two() {
    let out = bin().arg("check").arg(fixture("malformed.lift")).output().unwrap();
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 1"), "diagnostic should cite the line: {err}");
}

#[test]
fn unknown_reference_exits_two() {
    let out = bin().arg("check").arg(fixture("unknown-hom.lift")).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains('u'), "diagnostic should name the reference");
}

#[test]
fn missing_required_flag_exits_two() {
    let out = bin().arg("pi1").arg(example("dyadic-solenoid.lift")).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--word"));

    let out = bin().arg("meet").arg(example("dyadic-solenoid.lift")).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--target"));
}

#[test]
fn unreadable_spec_exits_one() {
    let out = bin().arg("check").arg(fixture("no-such-file.lift")).output().unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn incoherent_tower_exits_three() {
    // check reports the violations on stdout before exiting
    let out = bin().arg("check").arg(fixture("incoherent.lift")).output().unwrap();
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("coherence violation"));

    // every other command refuses to analyze an incoherent tower
    let out = bin().arg("classify").arg(fixture("incoherent.lift")).output().unwrap();
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("incoherent"));
}

#[test]
fn blown_enumeration_budget_exits_four() {
    let out = bin()
        .args(["classify", "--budget", "200"])
        .arg(fixture("budget-burner.lift"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn require_certified_gates_horizon_limited_verdicts() {
    let out = bin()
        .args(["classify", "--require-certified"])
        .arg(example("hawaiian-4.lift"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 5);
    // the report is still printed so the caller can see what was limited
    assert!(stdout(&out).contains("classification open"));

    let out = bin()
        .args(["classify", "--require-certified"])
        .arg(example("dyadic-solenoid.lift"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn horizon_env_var_is_a_fallback_only() {
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = bin();
        c.args(["fiber", "--report", "structured"]);
        c.args(extra);
        c.arg(example("dyadic-solenoid.lift"));
        if let Some(v) = env {
            c.env("LIFTLIM_DEFAULT_HORIZON", v);
        }
        c.output().unwrap()
    };

    let count_stages = |out: &Output| {
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["stages"].as_array().unwrap().len()
    };

    let env_only = run(&[], Some("4"));
    assert_eq!(code(&env_only), 0);
    assert_eq!(count_stages(&env_only), 5, "stages 0..=4 under the env default");

    let flag_wins = run(&["--horizon", "2"], Some("4"));
    assert_eq!(count_stages(&flag_wins), 3, "the flag overrides the env default");

    let bad_env = run(&[], Some("zero"));
    assert_eq!(code(&bad_env), 1);
    assert!(stderr(&bad_env).contains("LIFTLIM_DEFAULT_HORIZON"));
}

#[test]
fn spec_file_horizon_beats_env_default() {
    // covering.lift has no horizon line; give it one via a temp copy
    let text = std::fs::read_to_string(example("covering.lift")).unwrap();
    let dir = std::env::temp_dir().join("liftlim-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("covering-h3.lift");
    std::fs::write(&path, text.replace("[tower]", "[tower]\nhorizon = 3")).unwrap();

    let mut c = bin();
    c.args(["fiber", "--report", "structured"]).arg(&path);
    c.env("LIFTLIM_DEFAULT_HORIZON", "9");
    let out = c.output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stages"].as_array().unwrap().len(), 4, "file horizon 3 wins over env 9");
}

#[test]
fn structured_reports_are_byte_identical_across_runs() {
    let run = || {
        bin()
            .args(["density", "--report", "structured", "--horizon", "8"])
            .arg(example("dyadic-solenoid.lift"))
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.ends_with(b"\n"));

    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "liftlim.report/1");
    assert_eq!(v["command"], "density");
}

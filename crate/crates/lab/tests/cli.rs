use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reward-lab"))
        .args(args)
        .env_remove("REWARD_LAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    let o = lab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("simulate"));
    assert_eq!(lab(&["--version"]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_two_with_position() {
    let o = lab(&["search", "--theorem", "1", "--universe", "3x6"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("argument 5 `3x6`"), "{err}");
    assert_eq!(
        lab(&["simulate", "--rates", "1,1", "--M", "1000"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn expectation_mismatch_exits_one() {
    let args = [
        "check",
        "--rule",
        "sqrts",
        "--axiom",
        "A3",
        "--universe",
        "3x4",
    ];
    assert_eq!(
        lab(&[&args[..], &["--expect", "pass"]].concat())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        lab(&[&args[..], &["--expect", "fail"]].concat())
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn manifest_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("expect.txt");
    std::fs::write(&path, "# claims\nsqrts A3 fail\nproportional A3 pass\n").unwrap();
    let p = path.to_str().unwrap();
    let o = lab(&[
        "check",
        "--rule",
        "sqrts",
        "--rule",
        "proportional",
        "--axiom",
        "A3",
        "--universe",
        "3x4",
        "--expect",
        p,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    std::fs::write(&path, "sqrts A3 pass\n").unwrap();
    let o = lab(&[
        "check",
        "--rule",
        "sqrts",
        "--axiom",
        "A3",
        "--universe",
        "3x4",
        "--expect",
        p,
    ]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&path, "sqrts A9 pass\n").unwrap();
    let o = lab(&[
        "check",
        "--rule",
        "sqrts",
        "--axiom",
        "A3",
        "--universe",
        "3x4",
        "--expect",
        p,
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expect.txt"));
}

#[test]
fn output_file_and_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = lab(&[
        "matrix",
        "--universe",
        "3x4",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.get("matrix").is_some());

    let bad = dir.path().join("missing/dir/out.txt");
    let o = lab(&["matrix", "--universe", "2x2", "-o", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing/dir/out.txt"));
}

#[test]
fn seed_from_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_reward-lab"))
            .args([
                "simulate", "--rates", "3,1", "--M", "16", "--epochs", "20", "--format", "csv",
            ])
            .env("REWARD_LAB_SEED", seed)
            .output()
            .unwrap()
    };
    let a = run("11");
    assert_eq!(stdout(&a), stdout(&run("11")));
    assert_ne!(stdout(&a), stdout(&run("12")));
    let explicit = lab(&[
        "simulate", "--rates", "3,1", "--M", "16", "--epochs", "20", "--format", "csv", "--seed",
        "11",
    ]);
    assert_eq!(stdout(&a), stdout(&explicit));
}

#[test]
fn jobs_do_not_change_results() {
    let base = [
        "simulate", "--rates", "5,3,2", "--M", "64", "--epochs", "200", "--format", "json",
        "--seed", "4",
    ];
    let one = lab(&[&base[..], &["--jobs", "1"]].concat());
    let four = lab(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(stdout(&one), stdout(&four));
    let m1 = lab(&[
        "matrix",
        "--universe",
        "3x5",
        "--format",
        "json",
        "--jobs",
        "1",
    ]);
    let m4 = lab(&[
        "matrix",
        "--universe",
        "3x5",
        "--format",
        "json",
        "--jobs",
        "4",
    ]);
    assert_eq!(stdout(&m1), stdout(&m4));
}

use std::path::Path;
use std::process::{Command, Output};

fn ringchain(args: &[&str], cwd: &Path, env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringchain"));
    cmd.args(args).current_dir(cwd).env_remove("RINGCHAIN_OUT");
    if let Some(dir) = env_out {
        cmd.env("RINGCHAIN_OUT", dir);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const TUBE: &str =
    r#"{"schema_version": 1, "experiment": "tube", "profile": "cos001", "N_list": [64], "T": 2}"#;

#[test]
fn presets_lists_every_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringchain(&["presets"], dir.path(), None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["uniform", "cos001", "cos01", "bump"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.contains("0.502655"));
}

#[test]
fn validate_reports_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", TUBE);
    assert!(ringchain(&["validate", &good], dir.path(), None)
        .status
        .success());

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"schema_version": 1, "experiment": "tube", "N_list": [64], "T": 2, "delta": 1.5}"#,
    );
    let out = ringchain(&["validate", &bad], dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));

    let unknown = write(
        dir.path(),
        "unknown.json",
        r#"{"schema_version": 1, "experiment": "tube", "N_list": [64], "T": 2, "bogus": 1}"#,
    );
    let out = ringchain(&["validate", &unknown], dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn run_writes_report_and_honours_out_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tube.json", TUBE);
    let env_dir = dir.path().join("from_env");

    let out = ringchain(&["run", &cfg], dir.path(), Some(&env_dir));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(env_dir.join("report.json").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS tube[N=64].max_scaled_deviation"));

    let flag_dir = dir.path().join("from_flag");
    let out = ringchain(
        &[
            "run",
            &cfg,
            "--out",
            flag_dir.to_str().unwrap(),
            "--jobs",
            "2",
        ],
        dir.path(),
        Some(&env_dir),
    );
    assert!(out.status.success());
    for f in [
        "report.json",
        "tube.csv",
        "tube_N64.csv",
        "modes_N64.csv",
        "tube.svg",
    ] {
        assert!(flag_dir.join(f).exists(), "missing {f}");
    }

    let out = ringchain(&["run", &cfg], dir.path(), None);
    assert!(out.status.success());
    assert!(dir.path().join("ringchain_out/report.json").exists());
}

#[test]
fn failing_assertion_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // γ of cos01 is far above δ, so the tube assertions cannot hold.
    let cfg = write(dir.path(), "tube.json", TUBE);
    let out_dir = dir.path().join("o");
    let out = ringchain(
        &[
            "run",
            &cfg,
            "--preset",
            "cos01",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        dir.path(),
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["config"]["profile"], "cos01");

    let out = ringchain(&["run", &cfg, "--preset", "nope"], dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
}

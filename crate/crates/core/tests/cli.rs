use std::path::PathBuf;
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tamelab"))
        .args(args)
        .output()
        .unwrap()
}

fn path(rel: &str) -> String {
    scenarios().join(rel).display().to_string()
}

#[test]
fn passing_scenario_exits_zero() {
    let out = run(&["--scenario", &path("s0.json"), "--suite", "structures"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("pass")));
    assert!(text.lines().last().unwrap().contains("0 fail"));
}

#[test]
fn strict_turns_skips_into_exit_three() {
    let diamond = path("finite/diamond.json");
    assert_eq!(run(&["--scenario", &diamond]).status.code(), Some(0));
    assert_eq!(
        run(&["--scenario", &diamond, "--strict"]).status.code(),
        Some(3)
    );
}

#[test]
fn claim_prefix_selects_claims() {
    let out = run(&[
        "--scenario",
        &path("s1.json"),
        "--claim",
        "limit.",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<&str> = report["claims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert!(!ids.is_empty());
    assert!(ids.iter().all(|id| id.starts_with("limit.")), "{ids:?}");
    assert!(report["claims"][0].get("runtime_ms").is_none());
}

#[test]
fn input_errors_exit_two() {
    let dir = std::env::temp_dir().join(format!("tamelab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let broken = dir.join("broken.json");
    std::fs::write(&broken, "{\n  \"name\": \"x\",\n  \"alphabet\": [\"a\"\n}").unwrap();
    let out = run(&["--scenario", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let undirected = dir.join("undirected.json");
    std::fs::write(
        &undirected,
        r#"{"name": "u", "alphabet": ["a", "b"],
            "functions": [{"name": "two", "period": "ab"}, {"name": "three", "period": "abb"}]}"#,
    )
    .unwrap();
    let out = run(&["--scenario", undirected.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("two") && err.contains("three"), "{err}");

    assert_eq!(
        run(&["--scenario", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["--scenario", &path("s0.json"), "--oracle", "other"])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn subcommands_emit_json() {
    let out = run(&["--scenario", &path("s1.json"), "limit", "decide"]);
    assert_eq!(out.status.code(), Some(0));
    let sys: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(sys.get("c_a").is_some());

    let out = run(&["aec", "amalgamate", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("mstar").is_some());

    let out = run(&[
        "--scenario",
        &path("s1.json"),
        "level",
        "--side",
        "1",
        "--d",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

use std::path::Path;
use std::process::Command;

const CIR_MODEL: &str = r#"
[model]
b = 1.0
beta = -1.0
sigma = 1.4142135623730951
"#;

fn cbi_lab(dir: &Path, experiment: &str, config: &str) -> (i32, String) {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cbi-lab"))
        .arg(experiment)
        .arg("--config")
        .arg(&path)
        .arg("--seed")
        .arg("3")
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn passing_run_writes_summary_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = cbi_lab(dir.path(), "riccati-diag", CIR_MODEL);
    assert_eq!(code, 0, "{text}");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "riccati-diag");
    assert_eq!(summary["seed"], 3);
    assert_eq!(summary["passed"], true);
    assert!(!summary["checks"].as_array().unwrap().is_empty());

    let csvs: Vec<_> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    assert!(!csvs.is_empty());
    let first = std::fs::read_to_string(&csvs[0]).unwrap();
    assert!(first.starts_with("# experiment=riccati-diag"));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{CIR_MODEL}\n[experiment.rate-curve]\nexpect_regime = \"DegenerateF0\"\n");
    let (code, text) = cbi_lab(dir.path(), "rate-curve", &config);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL regime"), "{text}");
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{CIR_MODEL}\n[experiment.rate-curve]\nno_such_knob = 1\n");
    let (code, text) = cbi_lab(dir.path(), "rate-curve", &config);
    assert_eq!(code, 2, "{text}");

    let (code, _) = cbi_lab(dir.path(), "rate-curve", "[model]\nb = 1.0\nbeta = 0.5\n");
    assert_eq!(code, 2);
}

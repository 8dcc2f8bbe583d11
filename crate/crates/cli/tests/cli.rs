use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ragfuzz_fixtures::load_scenario;

fn ragfuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ragfuzz"))
        .args(args)
        .env_remove("RAGFUZZ_LOG")
        .output()
        .expect("binary runs")
}

fn tiny(root: &Path) -> PathBuf {
    load_scenario("tiny").unwrap().materialize(&root.join("inputs")).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_completes_tiny_and_reports() {
    let root = tempfile::tempdir().unwrap();
    let config = tiny(root.path());
    let dir = root.path().join("campaign");
    let (c, d) = (config.to_str().unwrap(), dir.to_str().unwrap());

    let out = ragfuzz(&["run", "--config", c, "--campaign-dir", d, "--mock-providers"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("4 generated, 3 compiled, 1 failed, 0 abandoned"), "{text}");
    assert!(text.contains("flagged 2 test case(s): 1 across compilers or opt levels, 1 across devices"), "{text}");

    let out = ragfuzz(&["report", "--campaign-dir", d]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let golden = load_scenario("tiny").unwrap().golden("report.md");
    assert_eq!(stdout(&out), std::fs::read_to_string(golden).unwrap());

    let out = ragfuzz(&["report", "--campaign-dir", d, "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["totals"]["generated"], 4);
}

#[test]
fn staged_commands_match_a_single_run() {
    let root = tempfile::tempdir().unwrap();
    let config = tiny(root.path());
    let c = config.to_str().unwrap();
    let staged = root.path().join("staged");
    let s = staged.to_str().unwrap();
    for cmd in ["index", "gen", "test"] {
        let out = ragfuzz(&[cmd, "--config", c, "--campaign-dir", s, "--mock-providers", "--workers-tool", "3"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", stderr(&out));
    }
    let out = ragfuzz(&["resume", "--campaign-dir", s]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let whole = root.path().join("whole");
    let w = whole.to_str().unwrap();
    let out = ragfuzz(&["run", "--config", c, "--campaign-dir", w, "--mock-providers"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(staged.join("report.json")).unwrap(),
        std::fs::read(whole.join("report.json")).unwrap()
    );
}

#[test]
fn report_before_testing_is_an_error() {
    let root = tempfile::tempdir().unwrap();
    let config = tiny(root.path());
    let d = root.path().join("campaign");
    let d = d.to_str().unwrap();
    let out = ragfuzz(&["index", "--config", config.to_str().unwrap(), "--campaign-dir", d, "--mock-providers"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = ragfuzz(&["report", "--campaign-dir", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("has not been tested yet"));
}

#[test]
fn config_errors_exit_with_1() {
    let root = tempfile::tempdir().unwrap();
    let d = root.path().join("campaign");
    let d = d.to_str().unwrap();

    let out = ragfuzz(&["run", "--campaign-dir", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--config is required"));

    let config = tiny(root.path());
    let text = std::fs::read_to_string(&config).unwrap();
    std::fs::write(&config, text.replace("overlap_chars = 40", "overlap_chars = 400")).unwrap();
    let out = ragfuzz(&["run", "--config", config.to_str().unwrap(), "--campaign-dir", d, "--mock-providers"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("overlap"), "{}", stderr(&out));

    let out = ragfuzz(&["resume", "--campaign-dir", d]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn a_changed_seed_is_refused_for_an_existing_campaign() {
    let root = tempfile::tempdir().unwrap();
    let config = tiny(root.path());
    let (c, d) = (config.to_str().unwrap(), root.path().join("campaign"));
    let d = d.to_str().unwrap();
    let out = ragfuzz(&["index", "--config", c, "--campaign-dir", d, "--mock-providers"]);
    assert_eq!(out.status.code(), Some(0));
    let out = ragfuzz(&["gen", "--config", c, "--campaign-dir", d, "--mock-providers", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("config"), "{}", stderr(&out));
}

#[test]
fn recorded_faults_exit_with_2() {
    let root = tempfile::tempdir().unwrap();
    let config = tiny(root.path());
    // Only the characteristics rules survive, so every codegen call fails.
    let rules_path = config.with_file_name("rules.toml");
    let rules = std::fs::read_to_string(&rules_path).unwrap();
    let kept: Vec<&str> = rules
        .split("[[rule]]")
        .filter(|r| r.contains("template = \"characteristics\""))
        .collect();
    std::fs::write(&rules_path, format!("[[rule]]{}", kept.join("[[rule]]"))).unwrap();

    let d = root.path().join("campaign");
    let out = ragfuzz(&["run", "--config", config.to_str().unwrap(), "--campaign-dir", d.to_str().unwrap(), "--mock-providers"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stdout(&out).contains("internal faults: 2"), "{}", stdout(&out));
}

use super::*;
use crate::diff::{Axis, Kind};
use crate::ledger::Stage;
use crate::pipeline::{ensure_preamble, extract_code_block};
use crate::util::sha256_hex;

const PASS_SOURCE: &str = "\
int tiny(int x) { return x; }

int scale(int x) {
  int y = x * 2;
  return y + 1;
}
";

fn fenced(body: &str) -> String {
    format!("Here is the program.\n```cpp\n{body}```\n")
}

fn digest(response: &str) -> String {
    sha256_hex(ensure_preamble(&extract_code_block(response).unwrap()))
}

/// One candidate function; its seed case needs one repair, and the seed and
/// its single mutant each carry one seeded divergence.
fn scenario(dir: &Path) -> PathBuf {
    let s0 = fenced("// S0\nint main() { return missing; }\n");
    let s1 = fenced("// S1\nint main() { return 0; }\n");
    let s2 = fenced("// S2\nint main() { int a[4] = {0}; return a[0]; }\n");
    std::fs::create_dir_all(dir.join("src")).unwrap();
    std::fs::create_dir_all(dir.join("docs")).unwrap();
    std::fs::write(dir.join("src/pass.cpp"), PASS_SOURCE).unwrap();
    std::fs::write(
        dir.join("docs/guide.md"),
        "Scaling helpers double their argument.\n\nDevice globals live in device memory.\n",
    )
    .unwrap();
    let rules = format!(
        r#"[[rule]]
template = "characteristics"
contains = "int scale"
response = "CHAR-SCALE: a kernel that doubles values"

[[rule]]
template = "codegen"
contains = "CHAR-SCALE"
response = '''{s0}'''

[[rule]]
template = "repair"
contains = "// S0"
response = '''{s1}'''

[[rule]]
template = "mutation"
contains = "// S1"
response = '''{s2}'''
"#
    );
    std::fs::write(dir.join("rules.toml"), rules).unwrap();
    let table = format!(
        r#"[[source]]
name = "S0"
sha256 = "{d0}"
[[source.compile]]
exit = 1
stderr = "error: use of undeclared identifier 'missing'"

[[source]]
name = "S1"
sha256 = "{d1}"
[[source.run]]
compiler = "mockB"
opt_level = "-O2"
stdout = "Output value from device kernel: 7\n"
[[source.run]]
compiler = "mockB"
opt_level = "-O3"
stdout = "Output value from device kernel: 7\n"
[[source.run]]
stdout = "Output value from device kernel: 5\n"

[[source]]
name = "S2"
sha256 = "{d2}"
[[source.run]]
device = "devB"
signal = "SEGV"
[[source.run]]
stdout = "0\n"
"#,
        d0 = digest(&s0),
        d1 = digest(&s1),
        d2 = digest(&s2),
    );
    std::fs::write(dir.join("table.toml"), table).unwrap();
    let config = r#"name = "mini"
seed = 11
mutations_per_case = 1

[rag]
max_chars = 60
overlap_chars = 10
threshold = 1.5
k = 2

[[passes]]
pass_name = "Mini"
sources = ["src/*.cpp"]
docs = ["docs/*.md"]

[providers.mock]
rules = "rules.toml"
embed_dim = 16

[toolchain]
mock_table = "table.toml"
run_timeout_secs = 10
devices = [{ device_id = "devA", arch = "a" }, { device_id = "devB", arch = "b" }]

[[toolchain.compilers]]
compiler_id = "mockA"
executable = "mock-a"
targets = [{ target_id = "mock64" }]

[[toolchain.compilers]]
compiler_id = "mockB"
executable = "mock-b"
targets = [{ target_id = "mock64" }]
"#;
    let path = dir.join("campaign.toml");
    std::fs::write(&path, config).unwrap();
    path
}

fn fresh(root: &Path) -> Campaign {
    let config = CampaignConfig::load(&scenario(&root.join("scenario"))).unwrap();
    Campaign::create(config, &root.join("run"), true).unwrap()
}

fn generation_tokens(ledger: &Ledger) -> (u64, u64) {
    ledger
        .entries()
        .iter()
        .filter(|e| e.stage.is_generation())
        .fold((0, 0), |(i, o), e| (i + e.input_tokens, o + e.output_tokens))
}

#[test]
fn mini_campaign_end_to_end() {
    let root = tempfile::tempdir().unwrap();
    let mut campaign = fresh(root.path());
    let report = campaign.run().unwrap();
    let t = &report.totals;
    assert_eq!((t.functions, t.characteristics), (1, 1));
    assert_eq!((t.generated, t.compiled, t.failed, t.abandoned), (2, 2, 0, 0));
    assert_eq!((t.repaired, t.mutants), (1, 1));
    assert_eq!(report.faults, 0);
    assert_eq!(report.matrix.compile_jobs, 16);
    assert_eq!(report.matrix.run_cells, 32);
    assert_eq!(report.matrix.run_by_status.get("crash_signal"), Some(&8));

    let got: Vec<(Kind, Axis)> = report.flagged.iter().map(|f| (f.kind, f.axis)).collect();
    assert_eq!(
        got,
        if report.flagged[0].kind == Kind::CrashOnSome {
            vec![
                (Kind::CrashOnSome, Axis::CrossDevice),
                (Kind::OutputMismatch, Axis::CrossCompiler),
                (Kind::OutputMismatch, Axis::CrossOptLevel),
            ]
        } else {
            vec![
                (Kind::OutputMismatch, Axis::CrossCompiler),
                (Kind::OutputMismatch, Axis::CrossOptLevel),
                (Kind::CrashOnSome, Axis::CrossDevice),
            ]
        }
    );
    assert_eq!(report.findings.total_flagged, 2);
    assert_eq!(report.findings.compiler_flagged, 1);
    assert_eq!(report.findings.device_flagged, 1);

    let findings = std::fs::read_to_string(campaign.layout().findings()).unwrap();
    assert_eq!(findings.lines().count(), 3);
    let md = std::fs::read_to_string(campaign.layout().report_markdown()).unwrap();
    assert!(md.contains("| **total** | 1 | 1 | 2 | 2 | 0 | 0 | 1 | 1 |"));

    // Characteristics, codegen, one repair and one mutation.
    let calls: Vec<Stage> = campaign.ledger().entries().iter().map(|e| e.stage).filter(|s| s.is_generation()).collect();
    assert_eq!(calls.len(), 4);
    assert_eq!(report.cost.unpriced_models, Vec::<String>::new());
    assert!(report.cost.total.cost.is_some());
}

#[test]
fn runs_are_bit_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    fresh(a.path()).run().unwrap();
    let mut second = fresh(b.path());
    second.set_workers(Workers { llm: 3, tool: 4 });
    second.run().unwrap();
    for file in ["report.json", "report.md", "findings.jsonl"] {
        let x = std::fs::read(a.path().join("run").join(file)).unwrap();
        let y = std::fs::read(b.path().join("run").join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn resume_after_every_stage_matches_uninterrupted() {
    let root = tempfile::tempdir().unwrap();
    let mut baseline = fresh(&root.path().join("base"));
    let expected = baseline.run().unwrap();
    let expected_tokens = generation_tokens(baseline.ledger());
    for stop in StageName::ALL {
        let dir = root.path().join(format!("stop-{stop}"));
        fresh(&dir).run_until(stop).unwrap();
        let mut resumed = Campaign::open(&dir.join("run")).unwrap();
        assert!(resumed.manifest().is_complete(stop));
        let report = resumed.run().unwrap();
        assert_eq!(report, expected, "after {stop}");
        assert_eq!(generation_tokens(resumed.ledger()), expected_tokens, "after {stop}");
    }
    // Resuming a finished campaign changes nothing.
    let before = baseline.ledger().len();
    let again = Campaign::open(baseline.dir()).unwrap().run().unwrap();
    assert_eq!(again, expected);
    assert_eq!(Ledger::open(&baseline.layout().ledger()).unwrap().len(), before);
}

#[test]
fn interrupted_case_is_redone_cleanly() {
    let root = tempfile::tempdir().unwrap();
    let mut c = fresh(root.path());
    c.run_until(StageName::Generate).unwrap();
    let pass = "Mini";
    let mut cases = c.cases(pass).unwrap();
    cases.sort_by_key(|r| r.origin == CaseOrigin::Seed);
    let child = &cases[0];
    assert_eq!(child.origin, CaseOrigin::Mutation);
    // Simulate a crash between the mutation call and the record write.
    std::fs::remove_file(c.layout().case_record(pass, &child.case.case_id)).unwrap();
    let mut manifest = c.manifest().clone();
    manifest.completed.retain(|s| *s < StageName::Generate);
    store::write_json(&c.layout().manifest(), &manifest).unwrap();
    let mut reopened = Campaign::open(c.dir()).unwrap();
    let report = reopened.run().unwrap();
    assert_eq!(report.totals.generated, 2);
    assert_eq!(report.findings.total_flagged, 2);
}

#[test]
fn config_change_is_refused() {
    let root = tempfile::tempdir().unwrap();
    let mut c = fresh(root.path());
    c.run_until(StageName::Extract).unwrap();
    let mut config = c.config().clone();
    config.seed += 1;
    let err = Campaign::create(config, c.dir(), true).err().unwrap();
    assert!(matches!(err, CampaignError::ConfigMismatch { .. }), "{err}");
    let err = Campaign::create(c.config().clone(), c.dir(), false).err().unwrap();
    assert!(matches!(err, CampaignError::ConfigMismatch { .. }), "{err}");
    // Same configuration with other worker counts reopens.
    let mut config = c.config().clone();
    config.workers = Workers { llm: 2, tool: 2 };
    assert!(Campaign::create(config, c.dir(), true).is_ok());

    let text = std::fs::read_to_string(c.layout().config()).unwrap();
    std::fs::write(c.layout().config(), text.replace("seed = 11", "seed = 12")).unwrap();
    assert!(matches!(Campaign::open(c.dir()), Err(CampaignError::ConfigMismatch { .. })));
}

#[test]
fn corrupt_manifest_is_reported() {
    let root = tempfile::tempdir().unwrap();
    let c = fresh(root.path());
    std::fs::write(c.layout().manifest(), "{ not json").unwrap();
    assert!(matches!(Campaign::open(c.dir()), Err(CampaignError::CorruptManifest { .. })));
    std::fs::write(
        c.layout().manifest(),
        r#"{"format_version":1,"config_sha256":"x","seed":1,"mock_providers":true,"completed":["index","extract"]}"#,
    )
    .unwrap();
    assert!(matches!(Campaign::open(c.dir()), Err(CampaignError::CorruptManifest { .. })));
    assert!(matches!(
        Campaign::open(&root.path().join("nowhere")),
        Err(CampaignError::CorruptManifest { .. })
    ));
}

#[test]
fn provider_faults_are_recorded_not_fatal() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("scenario");
    let path = scenario(&dir);
    // Without the codegen rule the draft call fails.
    let rules = std::fs::read_to_string(dir.join("rules.toml")).unwrap();
    let cut = rules.find("[[rule]]\ntemplate = \"codegen\"").unwrap();
    let end = rules[cut..].find("[[rule]]\ntemplate = \"repair\"").unwrap() + cut;
    std::fs::write(dir.join("rules.toml"), format!("{}{}", &rules[..cut], &rules[end..])).unwrap();
    let config = CampaignConfig::load(&path).unwrap();
    let report = Campaign::create(config, &root.path().join("run"), true).unwrap().run().unwrap();
    assert_eq!(report.totals.generated, 0);
    assert_eq!(report.totals.abandoned, 1);
    assert_eq!(report.faults, 1);
    assert_eq!(report.findings.total_flagged, 0);
}

#[test]
fn missing_sources_is_a_config_error() {
    let root = tempfile::tempdir().unwrap();
    let mut c = fresh(root.path());
    std::fs::remove_file(root.path().join("scenario/src/pass.cpp")).unwrap();
    match c.run_until(StageName::Extract) {
        Err(CampaignError::Config { field, .. }) => assert_eq!(field, "passes[0].sources"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn scrub_check_finds_leaked_keys() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("scenario");
    let path = scenario(&dir);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str(
        "\n[providers.llm]\nendpoint = \"http://127.0.0.1:9/v1/chat/completions\"\nmodel_id = \"gpt-4\"\napi_key_env = \"RAGFUZZ_TEST_SCRUB_KEY\"\n",
    );
    std::fs::write(&path, text).unwrap();
    std::env::set_var("RAGFUZZ_TEST_SCRUB_KEY", "sk-test-very-secret-value");
    let mut c = Campaign::create(CampaignConfig::load(&path).unwrap(), &root.path().join("run"), true).unwrap();
    c.run().unwrap();
    std::fs::write(c.dir().join("notes.txt"), "token sk-test-very-secret-value").unwrap();
    match c.scrub_check() {
        Err(CampaignError::SecretLeak { var, .. }) => assert_eq!(var, "RAGFUZZ_TEST_SCRUB_KEY"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn parallel_keeps_order() {
    let items: Vec<u32> = (0..100).collect();
    assert_eq!(parallel(7, &items, |x| x * 2), items.iter().map(|x| x * 2).collect::<Vec<_>>());
}

#[test]
fn stage_names_parse() {
    for s in StageName::ALL {
        assert_eq!(s.as_str().parse::<StageName>().unwrap(), s);
    }
    assert!("nope".parse::<StageName>().is_err());
}

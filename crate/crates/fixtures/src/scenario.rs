//! Scripted, closed-world campaign scenarios.
//!
//! A scenario directory under `assets/scenarios/<id>/` holds:
//!
//! * `scenario.toml`: snippets, scripted LLM rules, tool outcomes per
//!   snippet, and the expected outcome.
//! * the campaign config template named by `config`, which must point its
//!   mock rules at `rules.toml` and its mock table at `table.toml`.
//! * the directories listed in `copy` (pass sources, docs).
//!
//! LLM rules are keyed by template plus a distinguishing substring of the
//! bindings. Tool outcomes are keyed by the digest of the source the
//! pipeline will actually compile: the snippet taken out of its fenced
//! response, with the SYCL preamble added when missing. Loading computes
//! those digests, so the assets never carry hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ragfuzz_core::campaign::{CampaignReport, CaseRecord, Layout};
use ragfuzz_core::diff::{Axis, Kind};
use ragfuzz_core::pipeline::{ensure_preamble, extract_code_block};
use ragfuzz_core::prompt::TemplateId;
use ragfuzz_core::provider::ScriptRule;
use ragfuzz_core::toolchain::{MockCompileRule, MockRunRule, MockSource, MockTable};
use ragfuzz_core::util::sha256_hex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets_dir;

pub const RULES_FILE: &str = "rules.toml";
pub const TABLE_FILE: &str = "table.toml";
pub const CONFIG_FILE: &str = "campaign.toml";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario `{scenario}`: `{key}` is referenced but not defined")]
    OpenWorldKey { scenario: String, key: String },
    #[error("scenario `{scenario}`: {message}")]
    Invalid { scenario: String, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LlmEntry {
    template: TemplateId,
    #[serde(default)]
    pass_name: Option<String>,
    #[serde(default)]
    contains: Option<String>,
    #[serde(default)]
    response: Option<String>,
    #[serde(default)]
    response_file: Option<PathBuf>,
    #[serde(default)]
    snippet: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToolEntry {
    snippet: String,
    #[serde(default)]
    compile: Vec<MockCompileRule>,
    #[serde(default)]
    run: Vec<MockRunRule>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedCounts {
    pub functions: usize,
    pub characteristics: usize,
    pub generated: usize,
    pub compiled: usize,
    pub failed: usize,
    pub abandoned: usize,
    pub repaired: usize,
    pub mutants: usize,
    pub faults: usize,
}

impl ExpectedCounts {
    /// The same counts as reported by a finished campaign.
    pub fn observed(report: &CampaignReport) -> Self {
        let t = &report.totals;
        Self {
            functions: t.functions,
            characteristics: t.characteristics,
            generated: t.generated,
            compiled: t.compiled,
            failed: t.failed,
            abandoned: t.abandoned,
            repaired: t.repaired,
            mutants: t.mutants,
            faults: report.faults,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedDiscrepancy {
    /// Snippet whose case should be flagged.
    pub snippet: String,
    pub kind: Kind,
    pub axis: Axis,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(flatten)]
    pub counts: ExpectedCounts,
    #[serde(default)]
    pub discrepancy: Vec<ExpectedDiscrepancy>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    id: String,
    config: PathBuf,
    #[serde(default)]
    copy: Vec<PathBuf>,
    #[serde(default)]
    snippets: BTreeMap<String, PathBuf>,
    #[serde(default)]
    llm: Vec<LlmEntry>,
    #[serde(default)]
    tool: Vec<ToolEntry>,
    expected: Expected,
}

/// A validated scenario, ready to be written out as a campaign.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    /// Asset directory the scenario was loaded from.
    pub dir: PathBuf,
    pub config_template: String,
    copy: Vec<PathBuf>,
    /// Snippet name → code as the model returns it inside the fence.
    pub snippets: BTreeMap<String, String>,
    pub rules: Vec<ScriptRule>,
    pub table: MockTable,
    pub expected: Expected,
}

/// The model response carrying `code`.
pub fn fenced_response(code: &str) -> String {
    let mut code = code.to_string();
    if !code.ends_with('\n') {
        code.push('\n');
    }
    format!("Here is the requested SYCL test case.\n\n```cpp\n{code}```\n")
}

/// Digest of the source the pipeline compiles for `response`.
pub fn compiled_digest(response: &str) -> String {
    let code = extract_code_block(response).expect("scenario responses carry a code block");
    sha256_hex(ensure_preamble(&code))
}

/// Ids of the scenarios shipped in the assets directory.
pub fn scenario_ids() -> Vec<String> {
    let mut ids: Vec<String> = std::fs::read_dir(assets_dir().join("scenarios"))
        .map(|rd| {
            rd.filter_map(Result::ok)
                .filter(|e| e.path().join("scenario.toml").is_file())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .collect()
        })
        .unwrap_or_default();
    ids.sort();
    ids
}

/// Load and validate the shipped scenario `id`.
pub fn load_scenario(id: &str) -> Result<Scenario, ScenarioError> {
    let dir = assets_dir().join("scenarios").join(id);
    if id.contains(['/', '\\']) || !dir.join("scenario.toml").is_file() {
        return Err(ScenarioError::UnknownScenario(id.to_string()));
    }
    load_scenario_from(&dir)
}

/// Load and validate the scenario in `dir`.
pub fn load_scenario_from(dir: &Path) -> Result<Scenario, ScenarioError> {
    let path = dir.join("scenario.toml");
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| ScenarioError::Invalid {
        scenario: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let id = file.id.clone();
    let invalid = |message: String| ScenarioError::Invalid {
        scenario: id.clone(),
        message,
    };
    let open = |key: String| ScenarioError::OpenWorldKey {
        scenario: id.clone(),
        key,
    };
    let read = |rel: &Path| {
        let p = dir.join(rel);
        std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))
    };

    let mut snippets = BTreeMap::new();
    for (name, rel) in &file.snippets {
        snippets.insert(name.clone(), read(rel)?);
    }

    let mut table = MockTable::default();
    for t in &file.tool {
        let code = snippets.get(&t.snippet).ok_or_else(|| open(format!("snippets.{}", t.snippet)))?;
        if table.source.iter().any(|s| s.name == t.snippet) {
            return Err(invalid(format!("tool outcome for `{}` is defined twice", t.snippet)));
        }
        table.source.push(MockSource {
            name: t.snippet.clone(),
            sha256: compiled_digest(&fenced_response(code)),
            compile: t.compile.clone(),
            run: t.run.clone(),
        });
    }

    let mut rules = Vec::new();
    for (i, entry) in file.llm.iter().enumerate() {
        let given = [entry.response.is_some(), entry.response_file.is_some(), entry.snippet.is_some()];
        if given.iter().filter(|b| **b).count() != 1 {
            return Err(invalid(format!(
                "llm[{i}] needs exactly one of response, response_file, snippet"
            )));
        }
        let response = if let Some(r) = &entry.response {
            r.clone()
        } else if let Some(rel) = &entry.response_file {
            read(rel)?
        } else {
            let name = entry.snippet.as_ref().unwrap();
            let code = snippets.get(name).ok_or_else(|| open(format!("snippets.{name}")))?;
            if !table.source.iter().any(|s| &s.name == name) {
                return Err(open(format!("tool.{name}")));
            }
            fenced_response(code)
        };
        rules.push(ScriptRule {
            template: entry.template,
            pass_name: entry.pass_name.clone(),
            contains: entry.contains.clone(),
            response,
            usage: None,
        });
    }
    for d in &file.expected.discrepancy {
        if !snippets.contains_key(&d.snippet) {
            return Err(open(format!("snippets.{}", d.snippet)));
        }
    }

    let config_template = read(&file.config)?;
    check_config(&config_template).map_err(invalid)?;
    for c in &file.copy {
        if !dir.join(c).exists() {
            return Err(open(format!("copy.{}", c.display())));
        }
    }

    Ok(Scenario {
        id: file.id,
        dir: dir.to_path_buf(),
        config_template,
        copy: file.copy,
        snippets,
        rules,
        table,
        expected: file.expected,
    })
}

/// The template must read its mocks from the files `materialize` writes.
fn check_config(text: &str) -> Result<(), String> {
    let doc: toml::Table = toml::from_str(text).map_err(|e| format!("config template: {e}"))?;
    let lookup = |keys: &[&str]| -> Option<String> {
        let mut v: &toml::Value = doc.get(keys[0])?;
        for k in &keys[1..] {
            v = v.get(*k)?;
        }
        v.as_str().map(String::from)
    };
    if lookup(&["providers", "mock", "rules"]).as_deref() != Some(RULES_FILE) {
        return Err(format!("config template must set providers.mock.rules = \"{RULES_FILE}\""));
    }
    if lookup(&["toolchain", "mock_table"]).as_deref() != Some(TABLE_FILE) {
        return Err(format!("config template must set toolchain.mock_table = \"{TABLE_FILE}\""));
    }
    Ok(())
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), ScenarioError> {
    if from.is_file() {
        if let Some(parent) = to.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        std::fs::copy(from, to).map_err(|e| io_err(from, e))?;
        return Ok(());
    }
    std::fs::create_dir_all(to).map_err(|e| io_err(to, e))?;
    let mut entries: Vec<_> = std::fs::read_dir(from)
        .map_err(|e| io_err(from, e))?
        .filter_map(Result::ok)
        .collect();
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        copy_tree(&e.path(), &to.join(e.file_name()))?;
    }
    Ok(())
}

impl Scenario {
    /// Write the campaign inputs into `dir` and return the config path.
    pub fn materialize(&self, dir: &Path) -> Result<PathBuf, ScenarioError> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for c in &self.copy {
            copy_tree(&self.dir.join(c), &dir.join(c))?;
        }
        #[derive(Serialize)]
        struct Rules<'a> {
            rule: &'a [ScriptRule],
        }
        let rules = toml::to_string(&Rules { rule: &self.rules }).expect("rules serialize");
        let write = |name: &str, text: &str| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| io_err(&p, e))
        };
        write(RULES_FILE, &rules)?;
        write(TABLE_FILE, &self.table.to_toml())?;
        write(CONFIG_FILE, &self.config_template)?;
        Ok(dir.join(CONFIG_FILE))
    }

    /// Name of the snippet whose compiled form is `source`, if any.
    pub fn snippet_for_source(&self, source: &str) -> Option<&str> {
        let digest = sha256_hex(source);
        self.table
            .source
            .iter()
            .find(|s| s.sha256 == digest)
            .map(|s| s.name.as_str())
    }

    /// The flagged discrepancies of a finished campaign, named by snippet
    /// and sorted. Cases whose source is not in the table are named
    /// `?<case id>`.
    pub fn observed_discrepancies(
        &self,
        layout: &Layout,
        report: &CampaignReport,
    ) -> Result<Vec<ExpectedDiscrepancy>, ScenarioError> {
        let mut out = Vec::new();
        for f in &report.flagged {
            let path = layout.case_record(&f.pass_name, &f.case_id);
            let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let rec: CaseRecord = serde_json::from_str(&text).map_err(|e| io_err(&path, e))?;
            let snippet = match self.snippet_for_source(&rec.case.source) {
                Some(s) => s.to_string(),
                None => format!("?{}", f.case_id),
            };
            out.push(ExpectedDiscrepancy {
                snippet,
                kind: f.kind,
                axis: f.axis,
            });
        }
        out.sort();
        Ok(out)
    }

    /// Path of a golden file under `expected/`, if the scenario has one.
    pub fn golden(&self, name: &str) -> PathBuf {
        self.dir.join("expected").join(name)
    }
}

//! Campaign directory layout and persisted records.
//!
//! ```text
//! <campaign>/
//!   manifest.json  config.toml  ledger.jsonl  timing.json
//!   index/                       chunk manifest, vectors, embedding cache
//!   <pass>/functions.json
//!   <pass>/functions/<function_id>/characteristics.json | failure.json
//!   <pass>/<case_id>/case.json  source.cpp  exchanges.jsonl
//!   <pass>/<case_id>/gate/attempt-<n>/
//!   <pass>/<case_id>/build/<job>/  runs/<job>__<device>/
//!   <pass>/<case_id>/results/compile/<job>.json
//!   <pass>/<case_id>/results/run/<job>__<device>.json
//!   findings.jsonl  classify.json  report.json  report.md
//! ```
//!
//! Every JSON record is written to a temporary file and renamed into place,
//! so a record that exists is complete.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::extract::PassFunction;
use crate::pipeline::TestCase;
use crate::toolchain::{CellKey, CompileJob};
use crate::util::path_component;

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn ledger(&self) -> PathBuf {
        self.root.join("ledger.jsonl")
    }

    pub fn timing(&self) -> PathBuf {
        self.root.join("timing.json")
    }

    pub fn index_dir(&self) -> PathBuf {
        self.root.join("index")
    }

    pub fn embedding_cache(&self) -> PathBuf {
        self.index_dir().join("embeddings.jsonl")
    }

    pub fn findings(&self) -> PathBuf {
        self.root.join("findings.jsonl")
    }

    pub fn classify(&self) -> PathBuf {
        self.root.join("classify.json")
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn report_markdown(&self) -> PathBuf {
        self.root.join("report.md")
    }

    pub fn pass_dir(&self, pass_name: &str) -> PathBuf {
        self.root.join(path_component(pass_name))
    }

    pub fn functions(&self, pass_name: &str) -> PathBuf {
        self.pass_dir(pass_name).join("functions.json")
    }

    pub fn function_dir(&self, pass_name: &str, function_id: &str) -> PathBuf {
        self.pass_dir(pass_name).join("functions").join(function_id)
    }

    pub fn case_dir(&self, pass_name: &str, case_id: &str) -> PathBuf {
        self.pass_dir(pass_name).join(case_id)
    }

    pub fn case_record(&self, pass_name: &str, case_id: &str) -> PathBuf {
        self.case_dir(pass_name, case_id).join("case.json")
    }

    pub fn compile_result(&self, pass_name: &str, case_id: &str, job: &CompileJob) -> PathBuf {
        self.case_dir(pass_name, case_id)
            .join("results/compile")
            .join(format!("{}.json", job.label()))
    }

    pub fn run_result(&self, pass_name: &str, case_id: &str, cell: &CellKey) -> PathBuf {
        self.case_dir(pass_name, case_id)
            .join("results/run")
            .join(format!("{}.json", cell_label(cell)))
    }
}

pub fn cell_label(cell: &CellKey) -> String {
    format!("{}__{}", cell.job().label(), path_component(&cell.device_id))
}

/// A candidate definition as persisted by the extract stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub function_id: String,
    /// Source file, relative to the configuration directory when possible.
    pub file: String,
    #[serde(flatten)]
    pub function: PassFunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacteristicsFailure {
    pub function_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseOrigin {
    Seed,
    Mutation,
}

/// Final state of one generated (or attempted) test case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: TestCase,
    pub origin: CaseOrigin,
    /// False when no draft was ever produced (the codegen or mutation call
    /// itself failed).
    pub generated: bool,
    pub repair_attempts: usize,
    /// Set when the case ended because of a provider, prompt or tool fault.
    #[serde(default)]
    pub fault: Option<String>,
}

impl CaseRecord {
    pub fn compiles(&self) -> bool {
        self.case.status == crate::pipeline::CaseStatus::Compiles
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    /// Compiling cases that had enough run cells to compare.
    pub cases_classified: usize,
    /// Cases kept out of the findings by a suppression pattern.
    pub suppressed: Vec<String>,
}

pub(crate) fn io_err(path: &Path, e: std::io::Error) -> CampaignError {
    CampaignError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CampaignError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut file = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    file.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    file.sync_data().map_err(|e| io_err(&tmp, e))?;
    drop(file);
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CampaignError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("record serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, values: &[T]) -> Result<(), CampaignError> {
    let mut bytes = Vec::new();
    for v in values {
        serde_json::to_writer(&mut bytes, v).expect("record serializes");
        bytes.push(b'\n');
    }
    write_atomic(path, &bytes)
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CampaignError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CampaignError::Io {
        path: path.to_path_buf(),
        message: format!("unreadable record: {e}"),
    })
}

pub(crate) fn read_json_if_exists<T: DeserializeOwned>(path: &Path) -> Result<Option<T>, CampaignError> {
    if path.is_file() {
        read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CampaignError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| CampaignError::Io {
                path: path.to_path_buf(),
                message: format!("unreadable record: {e}"),
            })
        })
        .collect()
}

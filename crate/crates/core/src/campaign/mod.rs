//! Campaign orchestration: configuration, the persisted campaign directory,
//! stage scheduling, resume and reporting.

mod config;
mod report;
mod stages;
mod store;

pub use config::{
    CampaignConfig, CassetteConfig, CassetteMode, DiffConfig, GateConfig, MockProviders, PassConfig, ProvidersConfig,
    ToolchainSection, Workers, MAX_REPAIR_ATTEMPTS_CAP,
};
pub use report::{
    build_report, emit_report, render_markdown, CampaignReport, CostSummary, FlaggedCase, MatrixStats, PassCounts,
    ReportFormat, StageCost,
};
pub use store::{
    cell_label, CaseOrigin, CaseRecord, CharacteristicsFailure, ClassifyRecord, FunctionRecord, Layout,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::DiffError;
use crate::extract::ExtractError;
use crate::ledger::{Ledger, LedgerError, PricingTable};
use crate::pipeline::{FeatureCatalog, PipelineError};
use crate::prompt::{PromptError, PromptSet};
use crate::provider::ProviderError;
use crate::rag::RagError;
use crate::toolchain::{Executor, MockTable, ProcessExecutor, TableExecutor, ToolchainError};
use store::{io_err, read_json, read_json_if_exists, write_atomic, write_json};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("configuration does not match the campaign directory: expected {expected}, found {found}")]
    ConfigMismatch { expected: String, found: String },
    #[error("corrupt manifest {path}: {reason}")]
    CorruptManifest { path: PathBuf, reason: String },
    #[error("secret from `{var}` found in {path}")]
    SecretLeak { var: String, path: PathBuf },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Rag(#[from] RagError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Toolchain(#[from] ToolchainError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

impl CampaignError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        io_err(path, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageName {
    Extract,
    Index,
    Characteristics,
    Generate,
    Compile,
    Run,
    Classify,
    Report,
}

impl StageName {
    pub const ALL: [StageName; 8] = [
        StageName::Extract,
        StageName::Index,
        StageName::Characteristics,
        StageName::Generate,
        StageName::Compile,
        StageName::Run,
        StageName::Classify,
        StageName::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageName::Extract => "extract",
            StageName::Index => "index",
            StageName::Characteristics => "characteristics",
            StageName::Generate => "generate",
            StageName::Compile => "compile",
            StageName::Run => "run",
            StageName::Classify => "classify",
            StageName::Report => "report",
        }
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StageName::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub config_sha256: String,
    pub seed: u64,
    pub mock_providers: bool,
    pub completed: Vec<StageName>,
}

impl Manifest {
    fn load(path: &Path) -> Result<Self, CampaignError> {
        let corrupt = |reason: String| CampaignError::CorruptManifest {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| corrupt(e.to_string()))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(corrupt(format!("unsupported format version {}", manifest.format_version)));
        }
        let mut seen = manifest.completed.clone();
        seen.dedup();
        if seen.len() != manifest.completed.len() || !manifest.completed.windows(2).all(|w| w[0] < w[1]) {
            return Err(corrupt("completed stages are not in pipeline order".into()));
        }
        Ok(manifest)
    }

    pub fn is_complete(&self, stage: StageName) -> bool {
        self.completed.contains(&stage)
    }
}

/// An open campaign directory.
pub struct Campaign {
    config: CampaignConfig,
    layout: Layout,
    manifest: Manifest,
    ledger: Arc<Ledger>,
    prompts: PromptSet,
    catalog: FeatureCatalog,
    pricing: PricingTable,
    executor: Arc<dyn Executor>,
}

impl Campaign {
    /// Start a campaign in `dir`, or reopen it if it already holds one for
    /// the same configuration.
    pub fn create(config: CampaignConfig, dir: &Path, mock_providers: bool) -> Result<Self, CampaignError> {
        config.validate()?;
        let layout = Layout::new(dir);
        if layout.manifest().exists() {
            let existing = Manifest::load(&layout.manifest())?;
            let found = config.config_hash();
            if existing.config_sha256 != found {
                return Err(CampaignError::ConfigMismatch {
                    expected: existing.config_sha256,
                    found,
                });
            }
            if existing.mock_providers != mock_providers {
                return Err(CampaignError::ConfigMismatch {
                    expected: format!("mock_providers = {}", existing.mock_providers),
                    found: format!("mock_providers = {mock_providers}"),
                });
            }
            return Self::assemble(config, layout, existing);
        }
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        write_atomic(&layout.config(), config.to_toml().as_bytes())?;
        let manifest = Manifest {
            format_version: MANIFEST_FORMAT_VERSION,
            config_sha256: config.config_hash(),
            seed: config.seed,
            mock_providers,
            completed: Vec::new(),
        };
        write_json(&layout.manifest(), &manifest)?;
        Self::assemble(config, layout, manifest)
    }

    /// Reopen an existing campaign directory.
    pub fn open(dir: &Path) -> Result<Self, CampaignError> {
        let layout = Layout::new(dir);
        let manifest = Manifest::load(&layout.manifest())?;
        let text = std::fs::read_to_string(layout.config()).map_err(|e| CampaignError::CorruptManifest {
            path: layout.config(),
            reason: e.to_string(),
        })?;
        let config = CampaignConfig::from_toml(&text, dir)?;
        let found = config.config_hash();
        if found != manifest.config_sha256 {
            return Err(CampaignError::ConfigMismatch {
                expected: manifest.config_sha256,
                found,
            });
        }
        Self::assemble(config, layout, manifest)
    }

    fn assemble(config: CampaignConfig, layout: Layout, manifest: Manifest) -> Result<Self, CampaignError> {
        let prompts = match &config.prompts_dir {
            Some(d) => PromptSet::load(&config.resolve(d))?,
            None => PromptSet::builtin(),
        };
        let catalog = match &config.catalog {
            Some(p) => FeatureCatalog::load(&config.resolve(p))?,
            None => FeatureCatalog::default(),
        };
        let pricing = match &config.pricing {
            Some(p) => PricingTable::load(&config.resolve(p))?,
            None => PricingTable::builtin(),
        };
        let runner = ProcessExecutor::new(config.sandbox_limits());
        let executor: Arc<dyn Executor> = match &config.toolchain.mock_table {
            Some(p) => Arc::new(TableExecutor::new(MockTable::load(&config.resolve(p))?, runner)),
            None => Arc::new(runner),
        };
        let ledger = Arc::new(Ledger::open(&layout.ledger())?);
        Ok(Self {
            config,
            layout,
            manifest,
            ledger,
            prompts,
            catalog,
            pricing,
            executor,
        })
    }

    /// Replace the executor, e.g. to add launcher aliases.
    pub fn with_executor(mut self, executor: Arc<dyn Executor>) -> Self {
        self.executor = executor;
        self
    }

    /// Worker counts are not part of the campaign identity and may change
    /// between sessions.
    pub fn set_workers(&mut self, workers: Workers) {
        self.config.workers = workers;
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.config
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn dir(&self) -> &Path {
        self.layout.root()
    }

    /// Run every incomplete stage up to and including `last`.
    pub fn run_until(&mut self, last: StageName) -> Result<(), CampaignError> {
        for stage in StageName::ALL.into_iter().filter(|s| *s <= last) {
            if self.manifest.is_complete(stage) {
                continue;
            }
            let started = Instant::now();
            tracing::info!(stage = stage.as_str(), "stage started");
            self.run_stage(stage)?;
            self.manifest.completed.push(stage);
            write_json(&self.layout.manifest(), &self.manifest)?;
            self.record_timing(stage, started.elapsed().as_millis() as u64)?;
            tracing::info!(stage = stage.as_str(), "stage completed");
        }
        self.scrub_check()
    }

    /// Run all remaining stages and return the report.
    pub fn run(&mut self) -> Result<CampaignReport, CampaignError> {
        self.run_until(StageName::Report)?;
        self.report()
    }

    /// The persisted report. Requires the report stage to have completed.
    pub fn report(&self) -> Result<CampaignReport, CampaignError> {
        read_json(&self.layout.report_json())
    }

    fn run_stage(&mut self, stage: StageName) -> Result<(), CampaignError> {
        match stage {
            StageName::Extract => self.extract_stage(),
            StageName::Index => self.index_stage(),
            StageName::Characteristics => self.characteristics_stage(),
            StageName::Generate => self.generate_stage(),
            StageName::Compile => self.compile_stage(),
            StageName::Run => self.run_cells_stage(),
            StageName::Classify => self.classify_stage(),
            StageName::Report => {
                let report = build_report(self)?;
                emit_report(&report, &self.layout, ReportFormat::Json)?;
                emit_report(&report, &self.layout, ReportFormat::Markdown)
            }
        }
    }

    fn record_timing(&self, stage: StageName, millis: u64) -> Result<(), CampaignError> {
        let path = self.layout.timing();
        let mut timing: BTreeMap<String, Vec<u64>> = read_json_if_exists(&path)?.unwrap_or_default();
        timing.entry(stage.as_str().to_string()).or_default().push(millis);
        write_json(&path, &timing)
    }

    /// Fail if the value of any configured API-key variable appears in a
    /// file under the campaign directory.
    pub fn scrub_check(&self) -> Result<(), CampaignError> {
        let secrets: Vec<(String, String)> = [&self.config.providers.llm, &self.config.providers.embedding]
            .into_iter()
            .flatten()
            .filter_map(|p| p.api_key_env.clone())
            .filter_map(|var| std::env::var(&var).ok().filter(|v| !v.is_empty()).map(|v| (var, v)))
            .collect();
        if secrets.is_empty() {
            return Ok(());
        }
        scan_for_secrets(self.layout.root(), &secrets)
    }
}

fn scan_for_secrets(dir: &Path, secrets: &[(String, String)]) -> Result<(), CampaignError> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let path = entry.path();
        let file_type = entry.file_type().map_err(|e| io_err(&path, e))?;
        if file_type.is_dir() {
            scan_for_secrets(&path, secrets)?;
        } else if file_type.is_file() {
            let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
            for (var, value) in secrets {
                let needle = value.as_bytes();
                if bytes.windows(needle.len()).any(|w| w == needle) {
                    return Err(CampaignError::SecretLeak {
                        var: var.clone(),
                        path,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Apply `f` to every item on up to `workers` threads. Results keep item
/// order.
pub(crate) fn parallel<T: Sync, R: Send>(workers: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every item processed"))
        .collect()
}

#[cfg(test)]
mod tests;

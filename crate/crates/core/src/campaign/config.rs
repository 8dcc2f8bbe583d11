use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::extract::DefinitionKind;
use crate::provider::ProviderConfig;
use crate::rag::RagPolicy;
use crate::toolchain::{Compatibility, DeviceConfig, OptLevel, SandboxLimits, ToolchainConfig};
use crate::util::sha256_hex;

/// Upper bound on repair attempts accepted from configuration.
pub const MAX_REPAIR_ATTEMPTS_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Seed test cases generated per characteristics record.
    #[serde(default = "one")]
    pub selections_per_function: usize,
    /// Mutation children generated per compiling seed case.
    #[serde(default = "two")]
    pub mutations_per_case: usize,
    #[serde(default = "five")]
    pub max_repair_attempts: usize,
    /// Directory of prompt template overrides.
    #[serde(default)]
    pub prompts_dir: Option<PathBuf>,
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    #[serde(default)]
    pub pricing: Option<PathBuf>,
    /// Directory relative paths are resolved against. Filled in on load.
    #[serde(default)]
    pub base_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Workers,
    #[serde(default)]
    pub rag: RagPolicy,
    pub passes: Vec<PassConfig>,
    #[serde(default)]
    pub providers: ProvidersConfig,
    pub toolchain: ToolchainSection,
    #[serde(default)]
    pub diff: DiffConfig,
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn five() -> usize {
    5
}

/// Parallelism. Not part of the configuration identity: results do not
/// depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workers {
    #[serde(default = "one")]
    pub llm: usize,
    #[serde(default = "one")]
    pub tool: usize,
}

impl Default for Workers {
    fn default() -> Self {
        Self { llm: 1, tool: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassConfig {
    pub pass_name: String,
    /// Globs of pass implementation files.
    pub sources: Vec<String>,
    /// Globs of documentation files for the retrieval index.
    #[serde(default)]
    pub docs: Vec<String>,
    /// Qualified-name globs; empty keeps every definition.
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default = "default_min_lines")]
    pub min_lines: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<DefinitionKind>,
}

fn default_min_lines() -> usize {
    3
}

fn default_kinds() -> Vec<DefinitionKind> {
    vec![DefinitionKind::Function, DefinitionKind::Method]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CassetteMode {
    Record,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CassetteConfig {
    pub mode: CassetteMode,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockProviders {
    /// Scripted responses (`[[rule]]` TOML) for the mock language model.
    #[serde(default)]
    pub rules: Option<PathBuf>,
    #[serde(default)]
    pub embed_seed: u64,
    #[serde(default = "default_embed_dim")]
    pub embed_dim: usize,
}

fn default_embed_dim() -> usize {
    64
}

impl Default for MockProviders {
    fn default() -> Self {
        Self {
            rules: None,
            embed_seed: 0,
            embed_dim: default_embed_dim(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvidersConfig {
    #[serde(default)]
    pub llm: Option<ProviderConfig>,
    #[serde(default)]
    pub embedding: Option<ProviderConfig>,
    #[serde(default)]
    pub cassette: Option<CassetteConfig>,
    #[serde(default)]
    pub mock: MockProviders,
}

/// The compiler configuration that decides whether a case needs repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub compiler: String,
    pub target: String,
    pub opt_level: OptLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolchainSection {
    pub compilers: Vec<ToolchainConfig>,
    pub devices: Vec<DeviceConfig>,
    #[serde(default)]
    pub compatibility: Compatibility,
    /// Defaults to the first compiler, its first target and lowest level.
    #[serde(default)]
    pub gate: Option<GateConfig>,
    /// Simulate every compiler from this table instead of running it.
    #[serde(default)]
    pub mock_table: Option<PathBuf>,
    #[serde(default = "default_compile_timeout")]
    pub compile_timeout_secs: f64,
    #[serde(default = "default_run_timeout")]
    pub run_timeout_secs: f64,
    #[serde(default = "default_fsize")]
    pub max_file_size_mb: Option<u64>,
    #[serde(default)]
    pub max_address_space_mb: Option<u64>,
}

fn default_compile_timeout() -> f64 {
    120.0
}

fn default_run_timeout() -> f64 {
    30.0
}

fn default_fsize() -> Option<u64> {
    Some(64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffConfig {
    #[serde(default = "default_precision")]
    pub float_precision: usize,
    /// Regexes over stderr marking "feature not supported" failures.
    #[serde(default)]
    pub unsupported_patterns: Vec<String>,
    /// Regexes over source text; matching cases are kept out of findings.
    #[serde(default)]
    pub ub_suppression: Vec<String>,
}

fn default_precision() -> usize {
    6
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            float_precision: default_precision(),
            unsupported_patterns: Vec::new(),
            ub_suppression: Vec::new(),
        }
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CampaignError {
    CampaignError::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl CampaignConfig {
    /// Parse and validate. `base_dir` is set to `base` unless the text
    /// already names one.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CampaignError> {
        let mut cfg: CampaignConfig = toml::from_str(text).map_err(|e| invalid("<document>", e.to_string()))?;
        if cfg.base_dir.is_none() {
            cfg.base_dir = Some(absolute(base));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text = std::fs::read_to_string(path).map_err(|e| CampaignError::io(path, e))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn base_dir(&self) -> &Path {
        self.base_dir.as_deref().unwrap_or(Path::new("."))
    }

    /// `path` resolved against the configuration's base directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir().join(path)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("campaign config serializes")
    }

    /// Identity of the configuration: everything except worker counts.
    pub fn config_hash(&self) -> String {
        let mut identity = self.clone();
        identity.workers = Workers::default();
        sha256_hex(identity.to_toml())
    }

    pub fn gate(&self) -> GateConfig {
        self.toolchain.gate.clone().unwrap_or_else(|| {
            let tc = &self.toolchain.compilers[0];
            GateConfig {
                compiler: tc.compiler_id.clone(),
                target: tc.targets[0].target_id.clone(),
                opt_level: *tc.opt_levels.iter().min().expect("validated non-empty"),
            }
        })
    }

    pub fn sandbox_limits(&self) -> SandboxLimits {
        let t = &self.toolchain;
        SandboxLimits {
            compile_timeout: std::time::Duration::from_secs_f64(t.compile_timeout_secs),
            run_timeout: std::time::Duration::from_secs_f64(t.run_timeout_secs),
            max_file_size: t.max_file_size_mb.map(|m| m << 20),
            max_address_space: t.max_address_space_mb.map(|m| m << 20),
        }
    }

    /// Device id to architecture group.
    pub fn device_arch(&self) -> BTreeMap<String, String> {
        self.toolchain
            .devices
            .iter()
            .map(|d| (d.device_id.clone(), d.arch().to_string()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must be non-empty"));
        }
        if self.selections_per_function == 0 {
            return Err(invalid("selections_per_function", "must be at least 1"));
        }
        if self.max_repair_attempts > MAX_REPAIR_ATTEMPTS_CAP {
            return Err(invalid(
                "max_repair_attempts",
                format!("{} exceeds the cap of {MAX_REPAIR_ATTEMPTS_CAP}", self.max_repair_attempts),
            ));
        }
        if self.workers.llm == 0 {
            return Err(invalid("workers.llm", "must be at least 1"));
        }
        if self.workers.tool == 0 {
            return Err(invalid("workers.tool", "must be at least 1"));
        }
        let r = &self.rag;
        if r.max_chars == 0 {
            return Err(invalid("rag.max_chars", "must be positive"));
        }
        if r.overlap_chars >= r.max_chars {
            return Err(invalid("rag.overlap_chars", "must be smaller than rag.max_chars"));
        }
        if !(r.threshold > 0.0 && r.threshold <= 2.0) {
            return Err(invalid("rag.threshold", "must be in (0, 2]"));
        }
        if r.k == 0 {
            return Err(invalid("rag.k", "must be at least 1"));
        }
        if self.passes.is_empty() {
            return Err(invalid("passes", "at least one pass is required"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, p) in self.passes.iter().enumerate() {
            if p.pass_name.trim().is_empty() {
                return Err(invalid(format!("passes[{i}].pass_name"), "must be non-empty"));
            }
            if !seen.insert(crate::util::path_component(&p.pass_name)) {
                return Err(invalid(format!("passes[{i}].pass_name"), format!("duplicate pass `{}`", p.pass_name)));
            }
            if p.sources.is_empty() {
                return Err(invalid(format!("passes[{i}].sources"), "at least one glob is required"));
            }
            if p.kinds.is_empty() {
                return Err(invalid(format!("passes[{i}].kinds"), "at least one kind is required"));
            }
            crate::extract::compile_patterns(&p.functions)
                .map_err(|e| invalid(format!("passes[{i}].functions"), e.to_string()))?;
        }
        for (field, provider) in [("providers.llm", &self.providers.llm), ("providers.embedding", &self.providers.embedding)] {
            if let Some(p) = provider {
                p.validate().map_err(|e| invalid(field, e.to_string()))?;
            }
        }
        if self.providers.embedding.as_ref().is_some_and(|p| p.dim.is_none()) {
            return Err(invalid("providers.embedding.dim", "required for embedding endpoints"));
        }
        if self.providers.mock.embed_dim == 0 {
            return Err(invalid("providers.mock.embed_dim", "must be positive"));
        }
        let t = &self.toolchain;
        if t.compilers.is_empty() {
            return Err(invalid("toolchain.compilers", "at least one compiler is required"));
        }
        if t.devices.is_empty() {
            return Err(invalid("toolchain.devices", "at least one device is required"));
        }
        crate::toolchain::validate(&t.compilers, &t.devices, &t.compatibility)
            .map_err(|e| invalid("toolchain", e.to_string()))?;
        for (field, secs) in [("toolchain.compile_timeout_secs", t.compile_timeout_secs), ("toolchain.run_timeout_secs", t.run_timeout_secs)] {
            if !(secs.is_finite() && secs > 0.0) {
                return Err(invalid(field, "must be positive"));
            }
        }
        if let Some(g) = &t.gate {
            let Some(tc) = t.compilers.iter().find(|c| c.compiler_id == g.compiler) else {
                return Err(invalid("toolchain.gate.compiler", format!("unknown compiler `{}`", g.compiler)));
            };
            if tc.target(&g.target).is_none() {
                return Err(invalid("toolchain.gate.target", format!("`{}` is not a target of `{}`", g.target, g.compiler)));
            }
            if !tc.opt_levels.contains(&g.opt_level) {
                return Err(invalid("toolchain.gate.opt_level", format!("`{}` does not build at {}", g.compiler, g.opt_level.flag())));
            }
        }
        if self.diff.float_precision == 0 {
            return Err(invalid("diff.float_precision", "must be at least 1"));
        }
        crate::diff::compile_suppressions(&self.diff.unsupported_patterns)
            .map_err(|e| invalid("diff.unsupported_patterns", e.to_string()))?;
        crate::diff::compile_suppressions(&self.diff.ub_suppression)
            .map_err(|e| invalid("diff.ub_suppression", e.to_string()))?;
        Ok(())
    }
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
name = "t"
seed = 7

[[passes]]
pass_name = "P"
sources = ["src/*.cpp"]

[toolchain]
compilers = [{ compiler_id = "a", executable = "cc", targets = [{ target_id = "x" }] }]
devices = [{ device_id = "d" }]
"#;

    fn parse(text: &str) -> Result<CampaignConfig, CampaignError> {
        CampaignConfig::from_toml(text, Path::new("/base"))
    }

    fn field_of(err: CampaignError) -> String {
        match err {
            CampaignError::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn defaults_apply() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.selections_per_function, 1);
        assert_eq!(cfg.mutations_per_case, 2);
        assert_eq!(cfg.max_repair_attempts, 5);
        assert_eq!(cfg.base_dir(), Path::new("/base"));
        assert_eq!(cfg.resolve(Path::new("m.toml")), Path::new("/base/m.toml"));
        assert_eq!(cfg.passes[0].min_lines, 3);
        let gate = cfg.gate();
        assert_eq!((gate.compiler.as_str(), gate.target.as_str(), gate.opt_level), ("a", "x", OptLevel::O0));
        assert_eq!(cfg.sandbox_limits().max_file_size, Some(64 << 20));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = parse(MINIMAL).unwrap();
        let again = CampaignConfig::from_toml(&cfg.to_toml(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn hash_ignores_workers_only() {
        let cfg = parse(MINIMAL).unwrap();
        let mut more_workers = cfg.clone();
        more_workers.workers = Workers { llm: 8, tool: 4 };
        assert_eq!(cfg.config_hash(), more_workers.config_hash());
        let mut other_seed = cfg.clone();
        other_seed.seed += 1;
        assert_ne!(cfg.config_hash(), other_seed.config_hash());
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (MINIMAL.replace("seed = 7", "seed = 7\nmax_repair_attempts = 11"), "max_repair_attempts"),
            (MINIMAL.replace("seed = 7", "seed = 7\nselections_per_function = 0"), "selections_per_function"),
            (MINIMAL.replace("sources = [\"src/*.cpp\"]", "sources = []"), "passes[0].sources"),
            (MINIMAL.replace("devices = [{ device_id = \"d\" }]", "devices = []"), "toolchain.devices"),
            (format!("{MINIMAL}gate = {{ compiler = \"zz\", target = \"x\", opt_level = \"-O0\" }}\n"), "toolchain.gate.compiler"),
            (format!("{MINIMAL}[rag]\nthreshold = 0.0\n"), "rag.threshold"),
            (format!("{MINIMAL}[diff]\nub_suppression = [\"(\"]\n"), "diff.ub_suppression"),
            (format!("{MINIMAL}[workers]\nllm = 0\n"), "workers.llm"),
            (MINIMAL.replace("seed = 7", "seed = 7\nunknown_key = 1"), "<document>"),
        ];
        for (text, field) in cases {
            assert_eq!(field_of(parse(&text).unwrap_err()), field, "{text}");
        }
    }
}

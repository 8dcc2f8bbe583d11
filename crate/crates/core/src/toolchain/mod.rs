//! Compiler/target/opt-level/device matrix expansion and job execution.

mod mock;
mod sandbox;

pub use mock::{mock_compile, MockCompileRule, MockRunRule, MockSource, MockTable, TableExecutor, MOCK_COMPILER_ENV, MOCK_DEVICE_ENV, MOCK_TABLE_ENV};
pub use sandbox::{Launcher, ProcessExecutor, SandboxLimits};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToolchainError {
    #[error("compiler `{compiler_id}`: executable `{executable}` not found")]
    ToolNotFound { compiler_id: String, executable: String },
    #[error("invalid toolchain configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OptLevel {
    #[serde(rename = "-O0")]
    O0,
    #[serde(rename = "-O1")]
    O1,
    #[serde(rename = "-O2")]
    O2,
    #[serde(rename = "-O3")]
    O3,
}

impl OptLevel {
    pub const ALL: [OptLevel; 4] = [OptLevel::O0, OptLevel::O1, OptLevel::O2, OptLevel::O3];

    pub fn flag(self) -> &'static str {
        match self {
            OptLevel::O0 => "-O0",
            OptLevel::O1 => "-O1",
            OptLevel::O2 => "-O2",
            OptLevel::O3 => "-O3",
        }
    }

    pub fn parse_flag(flag: &str) -> Option<Self> {
        OptLevel::ALL.into_iter().find(|o| o.flag() == flag)
    }
}

impl fmt::Display for OptLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub target_id: String,
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolchainConfig {
    pub compiler_id: String,
    pub executable: String,
    #[serde(default)]
    pub base_flags: Vec<String>,
    pub targets: Vec<TargetConfig>,
    #[serde(default = "all_opt_levels")]
    pub opt_levels: Vec<OptLevel>,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
}

fn all_opt_levels() -> Vec<OptLevel> {
    OptLevel::ALL.to_vec()
}

impl ToolchainConfig {
    pub fn target(&self, target_id: &str) -> Option<&TargetConfig> {
        self.targets.iter().find(|t| t.target_id == target_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub device_id: String,
    /// Devices sharing an architecture group are compared across compilers.
    /// Defaults to the device id.
    #[serde(default)]
    pub arch: Option<String>,
    /// Environment applied when running on this device (device selectors).
    #[serde(default)]
    pub env: BTreeMap<String, String>,
    #[serde(default)]
    pub description: String,
}

impl DeviceConfig {
    pub fn arch(&self) -> &str {
        self.arch.as_deref().unwrap_or(&self.device_id)
    }
}

/// Devices each target's binaries may run on. A target without an entry
/// runs on every device; an empty list runs nowhere.
pub type Compatibility = BTreeMap<String, Vec<String>>;

pub fn validate(toolchains: &[ToolchainConfig], devices: &[DeviceConfig], compat: &Compatibility) -> Result<(), ToolchainError> {
    let bad = |m: String| Err(ToolchainError::Config(m));
    let mut seen = std::collections::BTreeSet::new();
    for tc in toolchains {
        if !seen.insert(&tc.compiler_id) {
            return bad(format!("duplicate compiler_id `{}`", tc.compiler_id));
        }
        if tc.opt_levels.is_empty() {
            return bad(format!("compiler `{}` has no opt_levels", tc.compiler_id));
        }
        if tc.targets.is_empty() {
            return bad(format!("compiler `{}` has no targets", tc.compiler_id));
        }
        let mut targets = std::collections::BTreeSet::new();
        for t in &tc.targets {
            if !targets.insert(&t.target_id) {
                return bad(format!("compiler `{}` lists target `{}` twice", tc.compiler_id, t.target_id));
            }
        }
    }
    let mut ids = std::collections::BTreeSet::new();
    for d in devices {
        if !ids.insert(d.device_id.as_str()) {
            return bad(format!("duplicate device_id `{}`", d.device_id));
        }
    }
    for (target, list) in compat {
        for d in list {
            if !ids.contains(d.as_str()) {
                return bad(format!("compatibility for `{target}` names unknown device `{d}`"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CompileJob {
    pub compiler_id: String,
    pub target_id: String,
    pub opt_level: OptLevel,
}

impl CompileJob {
    /// Directory-safe label, e.g. `clang++__nvptx__O2`.
    pub fn label(&self) -> String {
        format!(
            "{}__{}__{}",
            crate::util::path_component(&self.compiler_id),
            crate::util::path_component(&self.target_id),
            &self.opt_level.flag()[1..]
        )
    }
}

/// Coordinates of one execution cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub compiler_id: String,
    pub target_id: String,
    pub opt_level: OptLevel,
    pub device_id: String,
}

impl CellKey {
    pub fn job(&self) -> CompileJob {
        CompileJob {
            compiler_id: self.compiler_id.clone(),
            target_id: self.target_id.clone(),
            opt_level: self.opt_level,
        }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}@{}", self.compiler_id, self.target_id, self.opt_level, self.device_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub case_id: String,
    pub compile_jobs: Vec<CompileJob>,
    /// Run cells assuming every compile succeeds.
    pub run_cells: Vec<CellKey>,
}

/// compilers × targets × opt levels, in configuration order.
pub fn compile_jobs(toolchains: &[ToolchainConfig]) -> Vec<CompileJob> {
    let mut jobs = Vec::new();
    for tc in toolchains {
        for t in &tc.targets {
            for &opt_level in &tc.opt_levels {
                jobs.push(CompileJob {
                    compiler_id: tc.compiler_id.clone(),
                    target_id: t.target_id.clone(),
                    opt_level,
                });
            }
        }
    }
    jobs
}

/// Run cells for the given successful compile jobs.
pub fn run_cells(compiled: &[CompileJob], devices: &[DeviceConfig], compat: &Compatibility) -> Vec<CellKey> {
    let mut cells = Vec::new();
    for job in compiled {
        for d in devices {
            let allowed = compat.get(&job.target_id).is_none_or(|list| list.contains(&d.device_id));
            if allowed {
                cells.push(CellKey {
                    compiler_id: job.compiler_id.clone(),
                    target_id: job.target_id.clone(),
                    opt_level: job.opt_level,
                    device_id: d.device_id.clone(),
                });
            }
        }
    }
    cells
}

pub fn build_matrix(case_id: &str, toolchains: &[ToolchainConfig], devices: &[DeviceConfig], compat: &Compatibility) -> Matrix {
    let compile_jobs = compile_jobs(toolchains);
    let run_cells = run_cells(&compile_jobs, devices, compat);
    Matrix {
        case_id: case_id.to_string(),
        compile_jobs,
        run_cells,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileStatus {
    Ok,
    Error,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileResult {
    pub case_id: String,
    pub job: CompileJob,
    pub status: CompileStatus,
    pub stderr: String,
    pub binary_path: Option<PathBuf>,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    NonzeroExit,
    CrashSignal,
    Timeout,
    LaunchError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub case_id: String,
    pub cell: CellKey,
    pub status: RunStatus,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub duration_ms: u64,
}

/// Outcome of a compile invocation, before it is tied to a job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOutcome {
    pub status: CompileStatus,
    pub stderr: String,
    pub binary_path: Option<PathBuf>,
    pub duration_ms: u64,
}

/// Outcome of running a binary, before it is tied to a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub duration_ms: u64,
}

pub trait Executor: Send + Sync {
    /// Fail early if the compiler cannot be launched.
    fn probe(&self, toolchain: &ToolchainConfig) -> Result<(), ToolchainError>;

    /// Compile `source` inside `workdir`, which the caller owns exclusively.
    fn compile(
        &self,
        toolchain: &ToolchainConfig,
        target: &TargetConfig,
        opt_level: OptLevel,
        source: &Path,
        workdir: &Path,
    ) -> Result<CompileOutcome, ToolchainError>;

    fn run(&self, binary: &Path, device: &DeviceConfig, workdir: &Path) -> RunOutcome;
}

/// Compile one job and attach its coordinates.
pub fn compile(
    executor: &dyn Executor,
    case_id: &str,
    job: &CompileJob,
    toolchains: &[ToolchainConfig],
    source: &Path,
    workdir: &Path,
) -> Result<CompileResult, ToolchainError> {
    let tc = toolchains
        .iter()
        .find(|t| t.compiler_id == job.compiler_id)
        .ok_or_else(|| ToolchainError::Config(format!("unknown compiler `{}`", job.compiler_id)))?;
    let target = tc
        .target(&job.target_id)
        .ok_or_else(|| ToolchainError::Config(format!("unknown target `{}`", job.target_id)))?;
    let out = executor.compile(tc, target, job.opt_level, source, workdir)?;
    Ok(CompileResult {
        case_id: case_id.to_string(),
        job: job.clone(),
        status: out.status,
        stderr: out.stderr,
        binary_path: out.binary_path,
        duration_ms: out.duration_ms,
    })
}

/// Run one cell's binary and attach its coordinates.
pub fn run(executor: &dyn Executor, case_id: &str, cell: &CellKey, binary: &Path, device: &DeviceConfig, workdir: &Path) -> RunResult {
    let out = executor.run(binary, device, workdir);
    RunResult {
        case_id: case_id.to_string(),
        cell: cell.clone(),
        status: out.status,
        exit_code: out.exit_code,
        signal: out.signal,
        stdout: out.stdout,
        stderr: out.stderr,
        duration_ms: out.duration_ms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tc(id: &str, targets: &[&str]) -> ToolchainConfig {
        ToolchainConfig {
            compiler_id: id.into(),
            executable: id.into(),
            base_flags: vec!["-fsycl".into()],
            targets: targets
                .iter()
                .map(|t| TargetConfig {
                    target_id: t.to_string(),
                    flags: vec![format!("-fsycl-targets={t}")],
                })
                .collect(),
            opt_levels: OptLevel::ALL.to_vec(),
            env: BTreeMap::new(),
        }
    }

    fn dev(id: &str) -> DeviceConfig {
        DeviceConfig {
            device_id: id.into(),
            arch: None,
            env: BTreeMap::new(),
            description: String::new(),
        }
    }

    #[test]
    fn two_compilers_one_target_each() {
        let m = build_matrix("c", &[tc("a", &["t"]), tc("b", &["t"])], &[dev("d")], &Compatibility::new());
        assert_eq!(m.compile_jobs.len(), 8);
        assert_eq!(m.run_cells.len(), 8);
    }

    #[test]
    fn one_plus_five_targets_at_four_levels_is_24_compile_jobs() {
        let toolchains = [
            tc("clang++", &["nvptx64-nvidia-cuda"]),
            tc(
                "icpx",
                &["nvptx64-nvidia-cuda", "spir64", "spir64_x86_64", "spir64-unknown-unknown", "spir64_x86_64-unknown-unknown"],
            ),
        ];
        assert_eq!(compile_jobs(&toolchains).len(), 4 + 20);
    }

    #[test]
    fn compatibility_filters_devices() {
        let mut compat = Compatibility::new();
        compat.insert("t".into(), vec![]);
        compat.insert("u".into(), vec!["d2".into()]);
        let m = build_matrix("c", &[tc("a", &["t", "u", "v"])], &[dev("d1"), dev("d2")], &compat);
        assert_eq!(m.compile_jobs.len(), 12);
        // t: none, u: d2 only, v: both.
        assert_eq!(m.run_cells.len(), 4 + 8);
        assert!(m.run_cells.iter().all(|c| c.target_id != "t"));
    }

    #[test]
    fn ordering_is_deterministic() {
        let t = [tc("a", &["t"]), tc("b", &["t", "u"])];
        let d = [dev("x"), dev("y")];
        assert_eq!(build_matrix("c", &t, &d, &Compatibility::new()), build_matrix("c", &t, &d, &Compatibility::new()));
        let jobs = compile_jobs(&t);
        assert_eq!(jobs[0].label(), "a__t__O0");
        assert_eq!(jobs[4].label(), "b__t__O0");
    }

    #[test]
    fn validation_catches_duplicates_and_unknown_devices() {
        assert!(validate(&[tc("a", &["t"]), tc("a", &["t"])], &[dev("d")], &Compatibility::new()).is_err());
        assert!(validate(&[tc("a", &["t"])], &[dev("d"), dev("d")], &Compatibility::new()).is_err());
        let mut compat = Compatibility::new();
        compat.insert("t".into(), vec!["nope".into()]);
        assert!(validate(&[tc("a", &["t"])], &[dev("d")], &compat).is_err());
        let mut empty = tc("a", &["t"]);
        empty.opt_levels.clear();
        assert!(validate(&[empty], &[dev("d")], &Compatibility::new()).is_err());
    }

    #[test]
    fn opt_level_serde_uses_flags() {
        assert_eq!(serde_json::to_string(&OptLevel::O2).unwrap(), "\"-O2\"");
        assert_eq!(OptLevel::parse_flag("-O3"), Some(OptLevel::O3));
        assert_eq!(OptLevel::parse_flag("-Os"), None);
    }
}

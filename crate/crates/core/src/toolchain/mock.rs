//! Table-driven stand-in compiler.
//!
//! A table maps a source's SHA-256 to compile outcomes and run behaviour.
//! "Compiling" writes a small `/bin/sh` program whose behaviour depends on
//! the device it is run on (`RAGFUZZ_MOCK_DEVICE`), so the real sandbox
//! still executes every run job.
//!
//! ```toml
//! [[source]]
//! name = "kernel-a"              # informational
//! sha256 = "<hex digest of the exact source bytes>"
//!
//! [[source.compile]]             # first match wins; no match compiles fine
//! compiler = "mockB"             # optional
//! opt_level = "-O0"              # optional
//! exit = 1
//! stderr = "error: ..."
//!
//! [[source.run]]                 # first match wins; no match exits 0 silently
//! device = "devB"                # optional, also compiler/target/opt_level
//! stdout = "Output value from device kernel: 5\n"
//! signal = "SEGV"                # optional; or exit = N, sleep_secs = N
//! ```

use std::os::unix::fs::PermissionsExt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sandbox::ProcessExecutor;
use super::{
    CompileOutcome, CompileStatus, DeviceConfig, Executor, OptLevel, RunOutcome, TargetConfig, ToolchainConfig,
    ToolchainError,
};
use crate::util::sha256_hex;

pub const MOCK_TABLE_ENV: &str = "RAGFUZZ_MOCK_TABLE";
pub const MOCK_COMPILER_ENV: &str = "RAGFUZZ_MOCK_COMPILER";
pub const MOCK_DEVICE_ENV: &str = "RAGFUZZ_MOCK_DEVICE";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockCompileRule {
    #[serde(default)]
    pub compiler: Option<String>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub opt_level: Option<OptLevel>,
    #[serde(default)]
    pub exit: i32,
    #[serde(default)]
    pub stderr: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRunRule {
    #[serde(default)]
    pub compiler: Option<String>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub opt_level: Option<OptLevel>,
    #[serde(default)]
    pub device: Option<String>,
    #[serde(default)]
    pub stdout: String,
    #[serde(default)]
    pub stderr: String,
    #[serde(default)]
    pub exit: i32,
    /// Signal name without the `SIG` prefix, e.g. `SEGV`.
    #[serde(default)]
    pub signal: Option<String>,
    #[serde(default)]
    pub sleep_secs: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockSource {
    #[serde(default)]
    pub name: String,
    pub sha256: String,
    #[serde(default)]
    pub compile: Vec<MockCompileRule>,
    #[serde(default)]
    pub run: Vec<MockRunRule>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockTable {
    #[serde(default)]
    pub source: Vec<MockSource>,
}

fn matches(filter: &Option<String>, value: &str) -> bool {
    filter.as_deref().is_none_or(|f| f == value)
}

fn sh_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

const SIGNALS: [&str; 8] = ["SEGV", "ABRT", "BUS", "FPE", "ILL", "KILL", "TERM", "TRAP"];

impl MockTable {
    pub fn from_toml(text: &str) -> Result<Self, ToolchainError> {
        let table: Self = toml::from_str(text).map_err(|e| ToolchainError::Config(format!("mock table: {e}")))?;
        for s in &table.source {
            for r in &s.run {
                if let Some(sig) = &r.signal {
                    if !SIGNALS.contains(&sig.as_str()) {
                        return Err(ToolchainError::Config(format!("mock table: unsupported signal `{sig}`")));
                    }
                }
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, ToolchainError> {
        let text = std::fs::read_to_string(path).map_err(|e| ToolchainError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("mock table serializes")
    }

    pub fn lookup(&self, source: &str) -> Option<&MockSource> {
        let digest = sha256_hex(source);
        self.source.iter().find(|s| s.sha256 == digest)
    }

    /// Simulate one compilation. Returns `(exit code, stderr, program)`
    /// where `program` is the shell script to install on success.
    pub fn compile(&self, compiler: &str, target: &str, opt: OptLevel, source: &str) -> (i32, String, Option<String>) {
        let Some(entry) = self.lookup(source) else {
            return (
                1,
                format!("mock-cc: error: no table entry for source sha256 {}\n", sha256_hex(source)),
                None,
            );
        };
        let rule = entry.compile.iter().find(|r| {
            matches(&r.compiler, compiler) && matches(&r.target, target) && r.opt_level.is_none_or(|o| o == opt)
        });
        if let Some(r) = rule {
            if r.exit != 0 {
                return (r.exit, r.stderr.clone(), None);
            }
        }
        let stderr = rule.map(|r| r.stderr.clone()).unwrap_or_default();
        let arms: Vec<&MockRunRule> = entry
            .run
            .iter()
            .filter(|r| {
                matches(&r.compiler, compiler) && matches(&r.target, target) && r.opt_level.is_none_or(|o| o == opt)
            })
            .collect();
        (0, stderr, Some(program(&arms)))
    }
}

fn program(arms: &[&MockRunRule]) -> String {
    let mut sh = format!("#!/bin/sh\ncase \"${{{MOCK_DEVICE_ENV}-}}\" in\n");
    for r in arms {
        let pattern = r.device.as_deref().map_or("*".to_string(), sh_quote);
        sh.push_str(&format!("{pattern})\n"));
        if !r.stdout.is_empty() {
            sh.push_str(&format!("  printf '%s' {}\n", sh_quote(&r.stdout)));
        }
        if !r.stderr.is_empty() {
            sh.push_str(&format!("  printf '%s' {} >&2\n", sh_quote(&r.stderr)));
        }
        if let Some(secs) = r.sleep_secs {
            sh.push_str(&format!("  sleep {secs}\n"));
        }
        match &r.signal {
            Some(sig) => sh.push_str(&format!("  kill -{sig} $$\n")),
            None => sh.push_str(&format!("  exit {}\n", r.exit)),
        }
        sh.push_str("  ;;\n");
    }
    sh.push_str("esac\nexit 0\n");
    sh
}

fn install(program: &str, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, program)?;
    std::fs::set_permissions(path, std::fs::Permissions::from_mode(0o755))
}

/// Entry point of the `mock-cc` command: `[flags] -O<n> <source> -o <out>`.
/// The table and compiler id come from the environment. Returns the exit
/// code; diagnostics go to stderr.
pub fn mock_compile(args: &[String]) -> i32 {
    let mut output = None;
    let mut source = None;
    let mut opt = OptLevel::O0;
    let mut target = String::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "-o" {
            output = it.next().cloned();
        } else if let Some(level) = OptLevel::parse_flag(a) {
            opt = level;
        } else if let Some(t) = a.strip_prefix("-fsycl-targets=") {
            target = t.to_string();
        } else if !a.starts_with('-') {
            source = Some(a.clone());
        }
    }
    let (Some(output), Some(source)) = (output, source) else {
        eprintln!("mock-cc: usage: mock-cc [flags] <source> -o <output>");
        return 2;
    };
    let table = match std::env::var(MOCK_TABLE_ENV) {
        Ok(path) => match MockTable::load(Path::new(&path)) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("mock-cc: {e}");
                return 2;
            }
        },
        Err(_) => {
            eprintln!("mock-cc: {MOCK_TABLE_ENV} is not set");
            return 2;
        }
    };
    let compiler = std::env::var(MOCK_COMPILER_ENV).unwrap_or_default();
    let text = match std::fs::read_to_string(&source) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("mock-cc: error: cannot read {source}: {e}");
            return 1;
        }
    };
    let (code, stderr, program) = table.compile(&compiler, &target, opt, &text);
    eprint!("{stderr}");
    if let Some(p) = program {
        if let Err(e) = install(&p, Path::new(&output)) {
            eprintln!("mock-cc: error: cannot write {output}: {e}");
            return 1;
        }
    }
    code
}

/// In-process executor over a [`MockTable`]: compilation is simulated
/// directly, runs go through the real sandbox.
pub struct TableExecutor {
    table: MockTable,
    runner: ProcessExecutor,
}

impl TableExecutor {
    pub fn new(table: MockTable, runner: ProcessExecutor) -> Self {
        Self { table, runner }
    }
}

impl Executor for TableExecutor {
    fn probe(&self, _toolchain: &ToolchainConfig) -> Result<(), ToolchainError> {
        Ok(())
    }

    fn compile(
        &self,
        toolchain: &ToolchainConfig,
        target: &TargetConfig,
        opt_level: OptLevel,
        source: &Path,
        workdir: &Path,
    ) -> Result<CompileOutcome, ToolchainError> {
        let io = |path: &Path, e: std::io::Error| ToolchainError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let text = std::fs::read_to_string(source).map_err(|e| io(source, e))?;
        let (code, stderr, program) = self.table.compile(&toolchain.compiler_id, &target.target_id, opt_level, &text);
        if code != 0 {
            return Ok(CompileOutcome {
                status: CompileStatus::Error,
                stderr,
                binary_path: None,
                duration_ms: 0,
            });
        }
        std::fs::create_dir_all(workdir).map_err(|e| io(workdir, e))?;
        let binary = workdir.join("a.out");
        install(&program.expect("successful compile has a program"), &binary).map_err(|e| io(&binary, e))?;
        Ok(CompileOutcome {
            status: CompileStatus::Ok,
            stderr,
            binary_path: Some(binary),
            duration_ms: 0,
        })
    }

    fn run(&self, binary: &Path, device: &DeviceConfig, workdir: &Path) -> RunOutcome {
        if device.env.contains_key(MOCK_DEVICE_ENV) {
            return self.runner.run(binary, device, workdir);
        }
        let mut device = device.clone();
        device.env.insert(MOCK_DEVICE_ENV.to_string(), device.device_id.clone());
        self.runner.run(binary, &device, workdir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolchain::{RunStatus, SandboxLimits};
    use std::collections::BTreeMap;
    use std::time::Duration;

    const SRC: &str = "int main() { return 0; }\n";

    fn table() -> MockTable {
        MockTable {
            source: vec![MockSource {
                name: "k".into(),
                sha256: sha256_hex(SRC),
                compile: vec![MockCompileRule {
                    compiler: Some("bad".into()),
                    exit: 1,
                    stderr: "error: use of undeclared identifier 'x'\n".into(),
                    ..Default::default()
                }],
                run: vec![
                    MockRunRule {
                        device: Some("crashy".into()),
                        stdout: "partial\n".into(),
                        signal: Some("SEGV".into()),
                        ..Default::default()
                    },
                    MockRunRule {
                        opt_level: Some(OptLevel::O2),
                        stdout: "Output value from device kernel: 7\n".into(),
                        ..Default::default()
                    },
                    MockRunRule {
                        stdout: "Output value from device kernel: 5\n".into(),
                        ..Default::default()
                    },
                ],
            }],
        }
    }

    fn device(id: &str) -> DeviceConfig {
        DeviceConfig {
            device_id: id.into(),
            arch: None,
            env: [(MOCK_DEVICE_ENV.to_string(), id.to_string())].into(),
            description: String::new(),
        }
    }

    fn toolchain(id: &str) -> ToolchainConfig {
        ToolchainConfig {
            compiler_id: id.into(),
            executable: "@mock-cc".into(),
            base_flags: vec![],
            targets: vec![TargetConfig {
                target_id: "mock64".into(),
                flags: vec!["-fsycl-targets=mock64".into()],
            }],
            opt_levels: OptLevel::ALL.to_vec(),
            env: BTreeMap::new(),
        }
    }

    #[test]
    fn toml_round_trip() {
        let t = table();
        assert_eq!(MockTable::from_toml(&t.to_toml()).unwrap(), t);
        assert!(MockTable::from_toml("[[source]]\nsha256 = \"x\"\n[[source.run]]\nsignal = \"NOPE\"\n").is_err());
    }

    #[test]
    fn unknown_source_fails_to_compile() {
        let (code, stderr, program) = table().compile("good", "mock64", OptLevel::O0, "other");
        assert_eq!(code, 1);
        assert!(stderr.contains("no table entry"));
        assert!(program.is_none());
    }

    #[test]
    fn table_executor_compiles_and_runs_per_device() {
        let dir = tempfile::tempdir().unwrap();
        let source = dir.path().join("case.cpp");
        std::fs::write(&source, SRC).unwrap();
        let exec = TableExecutor::new(
            table(),
            ProcessExecutor::new(SandboxLimits {
                run_timeout: Duration::from_secs(5),
                ..SandboxLimits::default()
            }),
        );
        let tc = toolchain("bad");
        let out = exec.compile(&tc, &tc.targets[0], OptLevel::O0, &source, &dir.path().join("b")).unwrap();
        assert_eq!(out.status, CompileStatus::Error);
        assert!(out.stderr.contains("undeclared identifier"));

        let tc = toolchain("good");
        let o0 = exec.compile(&tc, &tc.targets[0], OptLevel::O0, &source, &dir.path().join("g0")).unwrap();
        let o2 = exec.compile(&tc, &tc.targets[0], OptLevel::O2, &source, &dir.path().join("g2")).unwrap();
        let bin0 = o0.binary_path.unwrap();
        let run = exec.run(&bin0, &device("plain"), dir.path());
        assert_eq!(run.status, RunStatus::Ok);
        assert_eq!(run.stdout, "Output value from device kernel: 5\n");
        let run = exec.run(&o2.binary_path.unwrap(), &device("plain"), dir.path());
        assert_eq!(run.stdout, "Output value from device kernel: 7\n");
        let run = exec.run(&bin0, &device("crashy"), dir.path());
        assert_eq!(run.status, RunStatus::CrashSignal);
        assert_eq!(run.signal, Some(libc::SIGSEGV));
        assert_eq!(run.stdout, "partial\n");
    }

    #[test]
    fn shell_quoting_survives_awkward_output() {
        let r = MockRunRule {
            stdout: "it's $HOME `x` \\n %s\n".into(),
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("p");
        install(&program(&[&r]), &bin).unwrap();
        let out = ProcessExecutor::default().run(&bin, &device("any"), dir.path());
        assert_eq!(out.stdout, r.stdout);
    }
}

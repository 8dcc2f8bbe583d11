//! Subprocess execution with wall-clock timeouts, process-group cleanup
//! and resource limits.

use std::collections::BTreeMap;
use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::{
    CompileOutcome, CompileStatus, DeviceConfig, Executor, OptLevel, RunOutcome, RunStatus, TargetConfig,
    ToolchainConfig, ToolchainError,
};

/// Captured output is truncated beyond this many bytes per stream.
const MAX_CAPTURE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandboxLimits {
    pub compile_timeout: Duration,
    pub run_timeout: Duration,
    /// RLIMIT_FSIZE for run jobs, in bytes.
    pub max_file_size: Option<u64>,
    /// RLIMIT_AS for run jobs, in bytes. Off by default: GPU runtimes
    /// reserve very large virtual address ranges.
    pub max_address_space: Option<u64>,
}

impl Default for SandboxLimits {
    fn default() -> Self {
        Self {
            compile_timeout: Duration::from_secs(120),
            run_timeout: Duration::from_secs(30),
            max_file_size: Some(64 << 20),
            max_address_space: None,
        }
    }
}

/// Replacement command line for a symbolic executable name such as
/// `@mock-cc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Launcher {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub env: BTreeMap<String, String>,
    /// Environment variable that receives the compiler id, if any.
    pub compiler_env: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ProcessExecutor {
    pub limits: SandboxLimits,
    aliases: BTreeMap<String, Launcher>,
}

struct Captured {
    status: Option<ExitStatus>,
    timed_out: bool,
    stdout: String,
    stderr: String,
    duration: Duration,
}

fn reader<R: Read + Send + 'static>(stream: Option<R>) -> Option<JoinHandle<Vec<u8>>> {
    stream.map(|mut s| {
        std::thread::spawn(move || {
            let mut kept = Vec::new();
            let mut buf = [0u8; 8192];
            // Keep draining past the cap so the child never blocks on a full pipe.
            while let Ok(n) = s.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let room = MAX_CAPTURE.saturating_sub(kept.len());
                kept.extend_from_slice(&buf[..n.min(room)]);
            }
            kept
        })
    })
}

fn join(handle: Option<JoinHandle<Vec<u8>>>) -> String {
    handle
        .and_then(|h| h.join().ok())
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .unwrap_or_default()
}

fn kill_group(child: &Child) {
    // The child leads its own process group, so this also reaches anything
    // it spawned.
    unsafe {
        libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
    }
}

/// Spawn `cmd` in a fresh process group and wait up to `timeout`.
fn execute(mut cmd: Command, timeout: Duration, limits: Option<(Option<u64>, Option<u64>)>) -> std::io::Result<Captured> {
    cmd.stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped()).process_group(0);
    if let Some((fsize, address_space)) = limits {
        unsafe {
            cmd.pre_exec(move || {
                for (resource, value) in [(libc::RLIMIT_FSIZE, fsize), (libc::RLIMIT_AS, address_space)] {
                    if let Some(v) = value {
                        let lim = libc::rlimit {
                            rlim_cur: v as libc::rlim_t,
                            rlim_max: v as libc::rlim_t,
                        };
                        if libc::setrlimit(resource, &lim) != 0 {
                            return Err(std::io::Error::last_os_error());
                        }
                    }
                }
                Ok(())
            });
        }
    }
    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let out = reader(child.stdout.take());
    let err = reader(child.stderr.take());
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= timeout {
            timed_out = true;
            kill_group(&child);
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    // Reap stragglers that inherited the pipes.
    kill_group(&child);
    Ok(Captured {
        status,
        timed_out,
        stdout: join(out),
        stderr: join(err),
        duration: start.elapsed(),
    })
}

fn find_in_path(name: &str) -> Option<PathBuf> {
    if name.contains('/') {
        let p = PathBuf::from(name);
        return p.is_file().then_some(p);
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|dir| dir.join(name))
            .find(|candidate| candidate.is_file())
    })
}

impl ProcessExecutor {
    pub fn new(limits: SandboxLimits) -> Self {
        Self {
            limits,
            aliases: BTreeMap::new(),
        }
    }

    pub fn with_alias(mut self, name: impl Into<String>, launcher: Launcher) -> Self {
        self.aliases.insert(name.into(), launcher);
        self
    }

    fn command_for(&self, toolchain: &ToolchainConfig) -> Result<Command, ToolchainError> {
        if let Some(l) = self.aliases.get(&toolchain.executable) {
            let mut cmd = Command::new(&l.program);
            cmd.args(&l.args).envs(&l.env);
            if let Some(var) = &l.compiler_env {
                cmd.env(var, &toolchain.compiler_id);
            }
            return Ok(cmd);
        }
        let path = find_in_path(&toolchain.executable).ok_or_else(|| ToolchainError::ToolNotFound {
            compiler_id: toolchain.compiler_id.clone(),
            executable: toolchain.executable.clone(),
        })?;
        Ok(Command::new(path))
    }
}

impl Executor for ProcessExecutor {
    fn probe(&self, toolchain: &ToolchainConfig) -> Result<(), ToolchainError> {
        self.command_for(toolchain).map(|_| ())
    }

    fn compile(
        &self,
        toolchain: &ToolchainConfig,
        target: &TargetConfig,
        opt_level: OptLevel,
        source: &Path,
        workdir: &Path,
    ) -> Result<CompileOutcome, ToolchainError> {
        std::fs::create_dir_all(workdir).map_err(|e| ToolchainError::Io {
            path: workdir.to_path_buf(),
            message: e.to_string(),
        })?;
        let binary = workdir.join("a.out");
        let _ = std::fs::remove_file(&binary);
        let mut cmd = self.command_for(toolchain)?;
        cmd.args(&toolchain.base_flags)
            .args(&target.flags)
            .arg(opt_level.flag())
            .arg(source)
            .arg("-o")
            .arg(&binary)
            .current_dir(workdir)
            .envs(&toolchain.env);
        let captured = match execute(cmd, self.limits.compile_timeout, None) {
            Ok(c) => c,
            Err(e) => {
                return Err(ToolchainError::ToolNotFound {
                    compiler_id: toolchain.compiler_id.clone(),
                    executable: format!("{} ({e})", toolchain.executable),
                })
            }
        };
        let duration_ms = captured.duration.as_millis() as u64;
        let (status, binary_path, mut stderr) = if captured.timed_out {
            (CompileStatus::Timeout, None, captured.stderr)
        } else if captured.status.is_some_and(|s| s.success()) && binary.is_file() {
            (CompileStatus::Ok, Some(binary), captured.stderr)
        } else {
            (CompileStatus::Error, None, captured.stderr)
        };
        if status == CompileStatus::Error && captured.status.is_some_and(|s| s.success()) {
            stderr.push_str("\n[ragfuzz] compiler exited 0 but produced no output binary\n");
        }
        Ok(CompileOutcome {
            status,
            stderr,
            binary_path,
            duration_ms,
        })
    }

    fn run(&self, binary: &Path, device: &DeviceConfig, workdir: &Path) -> RunOutcome {
        let launch_error = |message: String| RunOutcome {
            status: RunStatus::LaunchError,
            exit_code: None,
            signal: None,
            stdout: String::new(),
            stderr: message,
            duration_ms: 0,
        };
        if !binary.is_file() {
            return launch_error(format!("binary {} does not exist", binary.display()));
        }
        if let Err(e) = std::fs::create_dir_all(workdir) {
            return launch_error(format!("cannot create {}: {e}", workdir.display()));
        }
        let mut cmd = Command::new(binary);
        cmd.current_dir(workdir).envs(&device.env);
        let limits = Some((self.limits.max_file_size, self.limits.max_address_space));
        let captured = match execute(cmd, self.limits.run_timeout, limits) {
            Ok(c) => c,
            Err(e) => return launch_error(format!("failed to launch {}: {e}", binary.display())),
        };
        let (status, exit_code, signal) = match captured.status {
            None => (RunStatus::Timeout, None, None),
            Some(s) => match (s.code(), s.signal()) {
                (Some(0), _) => (RunStatus::Ok, Some(0), None),
                (Some(code), _) => (RunStatus::NonzeroExit, Some(code), None),
                (None, Some(sig)) => (RunStatus::CrashSignal, None, Some(sig)),
                (None, None) => (RunStatus::LaunchError, None, None),
            },
        };
        RunOutcome {
            status,
            exit_code,
            signal,
            stdout: captured.stdout,
            stderr: captured.stderr,
            duration_ms: captured.duration.as_millis() as u64,
        }
    }
}

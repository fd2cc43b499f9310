use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;

use super::{DefectKind, Oracle, SharedOracle, Verdict, DEFAULT_TIMEOUT};
use crate::io::{write_network, FileFormat};
use crate::network::Network;

/// How process outcomes map to verdicts.
#[derive(Clone, Debug, Default)]
pub struct FailurePolicy {
    /// Count only termination by signal (or shell status 128+n) as a
    /// defect, not any nonzero exit.
    pub strict: bool,
    /// A match in stdout or stderr is a defect.
    pub pattern: Option<Regex>,
    pub hang_as_defect: bool,
}

/// Everything observed about one command run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProcessOutcome {
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub timed_out: bool,
    pub spawn_error: Option<String>,
    pub stdout: String,
    pub stderr: String,
}

/// Verdict for a process outcome under `policy`.
pub fn classify(outcome: &ProcessOutcome, policy: &FailurePolicy) -> Verdict {
    if let Some(e) = &outcome.spawn_error {
        return Verdict::OracleError(format!("cannot run command: {e}"));
    }
    if outcome.timed_out {
        return if policy.hang_as_defect {
            Verdict::defect(DefectKind::Hang, "command timed out")
        } else {
            Verdict::OracleError("command timed out".into())
        };
    }
    if let Some(code @ (126 | 127)) = outcome.exit_code {
        return Verdict::OracleError(format!("shell could not run the command (status {code})"));
    }
    if let Some(re) = &policy.pattern {
        if let Some(m) = re.find(&outcome.stdout).or_else(|| re.find(&outcome.stderr)) {
            return Verdict::defect(DefectKind::Custom, format!("output matched `{}`", m.as_str()));
        }
    }
    if let Some(sig) = outcome.signal {
        return Verdict::defect(DefectKind::Crash, format!("terminated by signal {sig}"));
    }
    match outcome.exit_code {
        Some(code) if code > 128 => {
            Verdict::defect(DefectKind::Crash, format!("exit status {code} (signal {})", code - 128))
        }
        Some(code) if code != 0 && !policy.strict => {
            Verdict::defect(DefectKind::Custom, format!("exit status {code}"))
        }
        _ => Verdict::pass(),
    }
}

/// Runs a shell command per testcase. `{}` in the template is replaced by
/// the testcase path; without a placeholder the path is appended.
#[derive(Debug)]
pub struct ExternalOracle {
    template: String,
    pub policy: FailurePolicy,
    pub timeout: Duration,
    pub format: FileFormat,
    workdir: PathBuf,
    counter: AtomicU64,
}

fn shell_quote(path: &str) -> String {
    if path
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || "/._-+,".contains(c))
    {
        path.to_string()
    } else {
        format!("'{}'", path.replace('\'', r"'\''"))
    }
}

#[cfg(unix)]
fn signal_of(status: &ExitStatus) -> Option<i32> {
    use std::os::unix::process::ExitStatusExt;
    status.signal()
}

#[cfg(not(unix))]
fn signal_of(_: &ExitStatus) -> Option<i32> {
    None
}

#[cfg(unix)]
fn kill_group(pid: u32) {
    // The child leads its own process group; take the whole group down so
    // grandchildren do not keep the output pipes open.
    unsafe {
        libc::killpg(pid as libc::pid_t, libc::SIGKILL);
    }
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

impl ExternalOracle {
    pub fn new(template: impl Into<String>, format: FileFormat, workdir: impl Into<PathBuf>) -> ExternalOracle {
        ExternalOracle {
            template: template.into(),
            policy: FailurePolicy::default(),
            timeout: DEFAULT_TIMEOUT,
            format,
            workdir: workdir.into(),
            counter: AtomicU64::new(0),
        }
    }

    pub fn with_policy(mut self, policy: FailurePolicy) -> ExternalOracle {
        self.policy = policy;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> ExternalOracle {
        self.timeout = timeout;
        self
    }

    pub fn command_for(&self, path: &Path) -> String {
        let quoted = shell_quote(&path.display().to_string());
        if self.template.contains("{}") {
            self.template.replace("{}", &quoted)
        } else {
            format!("{} {quoted}", self.template)
        }
    }

    /// Runs the command on `path` and collects its outcome.
    pub fn run(&self, path: &Path) -> ProcessOutcome {
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(self.command_for(path))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        let mut child = match cmd.spawn() {
            Ok(c) => c,
            Err(e) => {
                return ProcessOutcome {
                    spawn_error: Some(e.to_string()),
                    ..ProcessOutcome::default()
                }
            }
        };
        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());
        let start = Instant::now();
        let mut pause = Duration::from_micros(200);
        let (status, timed_out) = loop {
            match child.try_wait() {
                Ok(Some(status)) => break (Some(status), false),
                Ok(None) if start.elapsed() >= self.timeout => {
                    #[cfg(unix)]
                    kill_group(child.id());
                    let _ = child.kill();
                    break (child.wait().ok(), true);
                }
                Ok(None) => {
                    thread::sleep(pause);
                    pause = (pause * 2).min(Duration::from_millis(20));
                }
                Err(e) => {
                    return ProcessOutcome {
                        spawn_error: Some(e.to_string()),
                        ..ProcessOutcome::default()
                    }
                }
            }
        };
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        ProcessOutcome {
            exit_code: if timed_out { None } else { status.and_then(|s| s.code()) },
            signal: if timed_out { None } else { status.as_ref().and_then(signal_of) },
            timed_out,
            spawn_error: None,
            stdout,
            stderr,
        }
    }

    /// Runs on an already written testcase and stores the captured output
    /// next to it as `.stdout` / `.stderr`.
    pub fn call_path(&self, path: &Path) -> Verdict {
        let outcome = self.run(path);
        let _ = fs::write(path.with_extension("stdout"), &outcome.stdout);
        let _ = fs::write(path.with_extension("stderr"), &outcome.stderr);
        classify(&outcome, &self.policy)
    }

    fn call_fresh(&self, net: &Network) -> Verdict {
        let seq = self.counter.fetch_add(1, Ordering::Relaxed);
        if let Err(e) = fs::create_dir_all(&self.workdir) {
            return Verdict::OracleError(format!("cannot create {}: {e}", self.workdir.display()));
        }
        let path = self
            .workdir
            .join(format!("oracle_{seq}.{}", self.format.extension()));
        let bytes = match write_network(net, self.format) {
            Ok(b) => b,
            Err(e) => return Verdict::OracleError(format!("cannot serialize testcase: {e}")),
        };
        if let Err(e) = fs::write(&path, bytes) {
            return Verdict::OracleError(format!("cannot write {}: {e}", path.display()));
        }
        let outcome = self.run(&path);
        let verdict = classify(&outcome, &self.policy);
        let _ = fs::remove_file(&path);
        verdict
    }
}

impl Oracle for ExternalOracle {
    fn call(&mut self, net: &Network) -> Verdict {
        self.call_fresh(net)
    }

    fn call_file(&mut self, _net: &Network, path: &Path) -> Verdict {
        self.call_path(path)
    }

    fn preferred_format(&self) -> Option<FileFormat> {
        Some(self.format)
    }
}

impl SharedOracle for ExternalOracle {
    fn call_shared(&self, _net: &Network, path: &Path) -> Verdict {
        self.call_path(path)
    }

    fn preferred_format(&self) -> Option<FileFormat> {
        Some(self.format)
    }
}

use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Stdio};
use std::thread::JoinHandle;

use super::PipelineError;

/// Pretty format consumed by the patch-stream parser.
pub const LOG_FORMAT: &str = "--pretty=format:commit %H %ct %x1f%an%x1f%ae%x1f%cn%x1f%ce";

/// Options pinned on every invocation so user configuration cannot change
/// the stream shape.
const CONFIG_OVERRIDES: &[&str] = &[
    "-c",
    "core.quotePath=false",
    "-c",
    "diff.noprefix=false",
    "-c",
    "diff.mnemonicPrefix=false",
    "-c",
    "diff.relative=false",
    "-c",
    "color.ui=never",
    "-c",
    "log.showSignature=false",
];

#[derive(Debug, Clone)]
pub struct Git {
    program: PathBuf,
    repo: PathBuf,
}

/// A running `git log` whose stdout is read incrementally.
pub struct LogProcess {
    child: Child,
    stderr: Option<JoinHandle<String>>,
    pub stdout: BufReader<ChildStdout>,
    description: String,
}

impl LogProcess {
    /// Waits for exit; a non-zero status becomes [`PipelineError::Git`].
    pub fn finish(mut self) -> Result<(), PipelineError> {
        // Drain anything the consumer left unread so git does not block.
        let _ = std::io::copy(&mut self.stdout, &mut std::io::sink());
        let status = self.child.wait()?;
        let stderr = self
            .stderr
            .take()
            .and_then(|h| h.join().ok())
            .unwrap_or_default();
        if status.success() {
            Ok(())
        } else {
            Err(PipelineError::Git {
                command: std::mem::take(&mut self.description),
                message: stderr.trim().to_string(),
            })
        }
    }
}

impl Drop for LogProcess {
    fn drop(&mut self) {
        if self.stderr.is_some() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

impl Git {
    pub fn new(program: impl Into<PathBuf>, repo: impl Into<PathBuf>) -> Self {
        Git {
            program: program.into(),
            repo: repo.into(),
        }
    }

    pub fn repo(&self) -> &Path {
        &self.repo
    }

    fn command(&self) -> Command {
        let mut cmd = Command::new(&self.program);
        cmd.arg("-C").arg(&self.repo).args(CONFIG_OVERRIDES);
        cmd.env("GIT_TERMINAL_PROMPT", "0")
            .env_remove("GIT_DIR")
            .env_remove("GIT_WORK_TREE");
        cmd
    }

    fn spawn_error(&self, err: std::io::Error) -> PipelineError {
        if err.kind() == std::io::ErrorKind::NotFound {
            PipelineError::GitUnavailable(self.program.display().to_string())
        } else {
            PipelineError::Io(err)
        }
    }

    fn output(&self, args: &[&str]) -> Result<std::process::Output, PipelineError> {
        self.command()
            .args(args)
            .stdin(Stdio::null())
            .output()
            .map_err(|e| self.spawn_error(e))
    }

    pub fn version(&self) -> Result<String, PipelineError> {
        let out = Command::new(&self.program)
            .arg("--version")
            .output()
            .map_err(|e| self.spawn_error(e))?;
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
    }

    /// Checks that the path is a repository with at least one commit and
    /// returns the HEAD commit hash.
    pub fn open(&self) -> Result<String, PipelineError> {
        self.version()?;
        if !self.repo.exists() {
            return Err(PipelineError::RepoNotFound(self.repo.clone()));
        }
        let probe = self.output(&["rev-parse", "--git-dir"])?;
        if !probe.status.success() {
            return Err(PipelineError::RepoNotFound(self.repo.clone()));
        }
        let head = self.output(&["rev-parse", "--verify", "--quiet", "HEAD^{commit}"])?;
        if !head.status.success() {
            return Err(PipelineError::EmptyRepository(self.repo.clone()));
        }
        Ok(String::from_utf8_lossy(&head.stdout).trim().to_string())
    }

    /// Paths of all files in the HEAD tree.
    pub fn head_files(&self) -> Result<Vec<String>, PipelineError> {
        let out = self.output(&["ls-tree", "-r", "-z", "--name-only", "HEAD"])?;
        if !out.status.success() {
            return Err(PipelineError::Git {
                command: "git ls-tree".into(),
                message: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(out
            .stdout
            .split(|&b| b == 0)
            .filter(|p| !p.is_empty())
            .map(|p| String::from_utf8_lossy(p).into_owned())
            .collect())
    }

    fn spawn_log(&self, extra: &[&str], paths: &[&str]) -> Result<LogProcess, PipelineError> {
        let mut cmd = self.command();
        cmd.args([
            "log",
            "--first-parent",
            "--diff-merges=first-parent",
            "-M",
            "-C",
            "--reverse",
            "--no-color",
            "--no-ext-diff",
            "--no-textconv",
            LOG_FORMAT,
        ]);
        cmd.args(extra).arg("HEAD").arg("--");
        cmd.args(paths.iter().map(|p| format!(":(literal){p}")));
        let description = format!("git log {} -- {}", extra.join(" "), paths.join(" "));
        let mut child = cmd
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| self.spawn_error(e))?;
        let stdout = BufReader::with_capacity(1 << 16, child.stdout.take().expect("piped stdout"));
        let mut err_pipe = child.stderr.take().expect("piped stderr");
        let stderr = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = err_pipe.read_to_string(&mut s);
            s
        });
        Ok(LogProcess {
            child,
            stderr: Some(stderr),
            stdout,
            description,
        })
    }

    /// Commit headers with one name-status line per touched file.
    pub fn name_status_log(&self) -> Result<LogProcess, PipelineError> {
        self.spawn_log(&["--name-status"], &[])
    }

    /// Full patch history restricted to `paths`.
    pub fn patch_log(&self, paths: &[&str]) -> Result<LogProcess, PipelineError> {
        self.spawn_log(&["-p"], paths)
    }
}

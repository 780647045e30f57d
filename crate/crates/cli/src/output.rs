use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: Status,
    pub examined: u64,
    pub failures: u64,
    pub detail: String,
    pub seconds: f64,
}

/// Everything one invocation did. `seconds` fields are the only values that
/// differ between identical runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub suites: Vec<SuiteResult>,
    pub outputs: Vec<String>,
    pub passed: bool,
}

/// Collects artifacts and suite results for one command.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn new(dir: &Path, command: &str, config: serde_json::Value) -> Result<Run> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                tool: "matexp",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                config,
                seeds: BTreeMap::new(),
                suites: Vec::new(),
                outputs: Vec::new(),
                passed: true,
            },
        })
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.to_string(), seed);
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, contents)?;
        self.manifest.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv<I: IntoIterator<Item = String>>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf> {
        let mut text = String::from(header);
        text.push('\n');
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// Times `f` and records its outcome as a suite.
    pub fn suite(&mut self, name: &str, f: impl FnOnce() -> Result<Check>) -> Result<&SuiteResult> {
        let start = Instant::now();
        let check = f()?;
        let seconds = start.elapsed().as_secs_f64();
        self.record(name, check, seconds);
        Ok(self.manifest.suites.last().unwrap())
    }

    pub fn record(&mut self, name: &str, check: Check, seconds: f64) {
        let status = if check.skipped {
            Status::Skipped
        } else if check.failures == 0 {
            Status::Pass
        } else {
            Status::Fail
        };
        if status == Status::Fail {
            self.manifest.passed = false;
        }
        self.manifest.suites.push(SuiteResult {
            name: name.to_string(),
            status,
            examined: check.examined,
            failures: check.failures,
            detail: check.detail,
            seconds,
        });
    }

    pub fn passed(&self) -> bool {
        self.manifest.passed
    }

    pub fn suites(&self) -> &[SuiteResult] {
        &self.manifest.suites
    }

    /// Writes `<command>-manifest.json` and returns the overall verdict.
    pub fn finish(mut self) -> Result<bool> {
        let name = format!("{}-manifest.json", self.manifest.command);
        self.manifest.outputs.push(name.clone());
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        write_atomic(&self.dir.join(&name), text.as_bytes())?;
        Ok(self.manifest.passed)
    }
}

/// Tally for one suite.
#[derive(Debug, Clone, Default)]
pub struct Check {
    pub examined: u64,
    pub failures: u64,
    pub skipped: bool,
    pub detail: String,
}

impl Check {
    pub fn skipped(reason: impl Into<String>) -> Check {
        Check { skipped: true, detail: reason.into(), ..Check::default() }
    }

    pub fn expect(&mut self, ok: bool) {
        self.examined += 1;
        if !ok {
            self.failures += 1;
        }
    }

    pub fn expect_with(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.expect(ok);
        if !ok && self.failures <= 5 {
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&what());
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> Check {
        let text = text.into();
        if self.detail.is_empty() {
            self.detail = text;
        } else {
            self.detail = format!("{text}; {}", self.detail);
        }
        self
    }
}

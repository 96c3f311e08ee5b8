use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Files of one run, all under `dir`.
pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path, hash: String) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            hash,
            written: Vec::new(),
        })
    }

    pub fn comment(&self) -> String {
        format!("#hilap v1 config_sha256={}", self.hash)
    }

    pub fn write(&mut self, name: &str, body: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// `rows` are complete lines without the header.
    pub fn csv(&mut self, name: &str, header: &str, rows: &str) -> CliResult<()> {
        let body = format!("{}\n{header}\n{rows}", self.comment());
        self.write(name, &body)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// `key = value` lines of a run summary, with checks that may fail.
#[derive(Default)]
pub struct Summary {
    text: String,
    failures: Vec<String>,
}

impl Summary {
    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key} = {value}");
    }

    pub fn block(&mut self, text: &str) {
        self.text.push_str(text);
        if !text.ends_with('\n') {
            self.text.push('\n');
        }
    }

    /// Records `key = value` and a failure when `ok` is false.
    pub fn check(&mut self, key: &str, value: impl std::fmt::Display, ok: bool) {
        self.field(key, &value);
        if !ok {
            self.failures.push(format!("{key} = {value}"));
        }
    }

    /// Records `label: ok` as a verdict line.
    pub fn verdict(&mut self, label: &str, ok: bool) {
        let _ = writeln!(self.text, "{label}: {ok}");
        if !ok {
            self.failures.push(format!("{label}: false"));
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }
}

/// Shortest round-trip form, so outputs are byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

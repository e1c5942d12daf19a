//! Run bookkeeping: every output goes through [`Run::write`] so the
//! manifest lists exactly the files a run produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use serde_json::{json, Value};

use crate::Status;

pub struct Run {
    root: PathBuf,
    command: &'static str,
    params: Value,
    seed: u64,
    start: String,
    outputs: Vec<String>,
    failures: BTreeMap<String, usize>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Run {
    pub fn start(root: &Path, command: &'static str, params: Value, seed: u64) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            command,
            params,
            seed,
            start: now(),
            outputs: vec![],
            failures: BTreeMap::new(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Writes `contents` to `relative` under the output root.
    pub fn write(&mut self, relative: impl AsRef<Path>, contents: &str) -> Result<()> {
        let relative = relative.as_ref();
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(relative.to_string_lossy().replace('\\', "/"));
        Ok(())
    }

    pub fn record_failures(&mut self, what: &str, count: usize) {
        *self.failures.entry(what.to_string()).or_default() += count;
    }

    pub fn finish(mut self, status: Status) -> Result<()> {
        self.outputs.sort();
        // serde_json maps are key-ordered, so the manifest keys come out sorted
        let manifest = json!({
            "command": self.command,
            "end": now(),
            "failures": self.failures,
            "outputs": self.outputs,
            "params": self.params,
            "seed": self.seed,
            "start": self.start,
            "status": status.as_str(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.root.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

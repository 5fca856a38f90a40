//! The run directory writer and the manifest it finishes with.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const MANIFEST_NAME: &str = "manifest.toml";

/// One named comparison against a limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: format!("< {limit:e}"),
            passed: value < limit,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: format!("[{lo}, {hi}]"),
            passed: lo <= value && value <= hi,
        }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Check {
            name: name.into(),
            value: if passed { 1.0 } else { 0.0 },
            limit: "= 1".into(),
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub artifact: String,
    pub experiment: String,
    pub passed: bool,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<String>,
    pub timings: Vec<Timing>,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
    pub config: ExperimentConfig,
}

/// Wall-clock stage timer. Only the manifest sees these numbers.
#[derive(Debug, Default)]
pub struct Stopwatch {
    stages: Vec<Timing>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push(Timing {
            stage: stage.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn into_stages(self) -> Vec<Timing> {
        self.stages
    }
}

/// Sole writer for a run directory. Every file lands through a temporary
/// name and a rename, so readers never see a partial file.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    written: Vec<String>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &target)?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.into());
        }
        Ok(())
    }

    /// Writes the manifest last, listing the data files already written.
    pub fn finish(mut self, mut manifest: Manifest) -> std::io::Result<PathBuf> {
        manifest.files = self.written.clone();
        let text = toml::to_string(&manifest).map_err(std::io::Error::other)?;
        self.write(MANIFEST_NAME, text.as_bytes())?;
        Ok(self.dir.join(MANIFEST_NAME))
    }
}

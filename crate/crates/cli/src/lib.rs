//! Config-driven runner for the `fockpath-core` studies.
//!
//! `run` reads one TOML experiment, computes it, and leaves CSV tables, an
//! SVG plot where one applies, and `manifest.toml` in the run directory.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod report;

use std::path::Path;

use fockpath_core::Error;

use config::{ConfigError, ExperimentConfig};
use manifest::{Manifest, RunWriter, Stopwatch};

pub const VERSION: &str = concat!("fockpath ", env!("CARGO_PKG_VERSION"));

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Usage = 1,
    Tolerance = 2,
    Infeasible = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&ConfigError> for Exit {
    fn from(e: &ConfigError) -> Self {
        match e {
            ConfigError::Infeasible(_) => Exit::Infeasible,
            _ => Exit::Usage,
        }
    }
}

/// Core errors raised mid-run: configuration problems the static checks
/// could not see, size guards, and everything numeric.
pub fn classify(e: &Error) -> Exit {
    if e.is_infeasible() {
        return Exit::Infeasible;
    }
    match e {
        Error::QuadratureInsufficient { .. } => Exit::Infeasible,
        Error::InvalidConfig(_)
        | Error::InvalidQuadrature(_)
        | Error::InvalidJob(_)
        | Error::InvalidMode { .. }
        | Error::ModeCountMismatch { .. }
        | Error::NotReal
        | Error::NotUnitary { .. }
        | Error::OutsideSafeRadius { .. }
        | Error::DegreeExceedsPad { .. }
        | Error::Parse { .. } => Exit::Usage,
        _ => Exit::Tolerance,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

/// Parse and static feasibility only.
pub fn validate(path: &Path) -> Exit {
    match ExperimentConfig::load(path).and_then(|c| c.plan()) {
        Ok(plan) => {
            println!(
                "{}: {} on {} mode(s), cutoff {}, dimension {}",
                path.display(),
                plan.config.experiment.name(),
                plan.modes.modes,
                plan.modes.cutoff,
                plan.modes.dimension().unwrap_or(0)
            );
            Exit::Pass
        }
        Err(e) => {
            eprintln!("error: {e}");
            Exit::from(&e)
        }
    }
}

/// Runs one experiment end to end and returns its exit code. Config errors
/// stop before the run directory exists; everything later is recorded in
/// the manifest.
pub fn run(path: &Path) -> Exit {
    let mut clock = Stopwatch::default();
    let planned = clock.time("plan", || ExperimentConfig::load(path).and_then(|c| c.plan()));
    let plan = match planned {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::from(&e);
        }
    };
    let dir = plan.config.output_dir(&stem(path));
    let mut writer = match RunWriter::create(&dir) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return Exit::Usage;
        }
    };

    let computed = clock.time("compute", || experiments::execute(&plan));
    let (outcome, error, exit) = match computed {
        Ok(o) => {
            let exit = if o.passed() { Exit::Pass } else { Exit::Tolerance };
            (o, None, exit)
        }
        Err(e) => (Default::default(), Some(e.to_string()), classify(&e)),
    };

    let written = clock.time("report", || -> std::io::Result<()> {
        for (name, bytes) in &outcome.files {
            writer.write(name, bytes)?;
        }
        Ok(())
    });
    if let Err(e) = written {
        eprintln!("error: writing into {}: {e}", dir.display());
        return Exit::Usage;
    }

    for c in &outcome.checks {
        println!(
            "{} {}: {:e} (limit {})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }

    let manifest = Manifest {
        artifact: VERSION.into(),
        experiment: plan.config.experiment.name().into(),
        passed: exit == Exit::Pass,
        exit_code: exit.code(),
        error,
        files: Vec::new(),
        timings: clock.into_stages(),
        metrics: outcome.metrics,
        checks: outcome.checks,
        config: plan.config,
    };
    match writer.finish(manifest) {
        Ok(p) => println!("wrote {}", p.display()),
        Err(e) => {
            eprintln!("error: writing manifest: {e}");
            return Exit::Usage;
        }
    }
    exit
}

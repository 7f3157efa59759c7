//! Scenario files: one geometry, a list of checks, a source and the
//! resolutions at which to run them.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use symm_core::geometry::{build_mesh, Coordinates, Geometry, MIN_RESOLUTION};
use symm_core::source::{Source, DEFAULT_SEED};
use symm_core::verify::Check;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: Geometry,
    pub checks: Vec<Check>,
    pub source: Source,
    pub levels: Vec<usize>,
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// A rejected scenario file, with the key that caused it.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(key: impl Into<String>, message: impl fmt::Display) -> Result<T, ConfigError> {
    Err(ConfigError {
        key: key.into(),
        message: message.to_string(),
    })
}

impl ScenarioConfig {
    /// Reads, parses and validates `path`. Relative paths inside the file are
    /// taken relative to the directory holding it.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail("", format!("cannot read {}: {e}", path.display())),
        };
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut cfg: ScenarioConfig = match serde_path_to_error::deserialize(de) {
            Ok(c) => c,
            Err(e) => {
                let key = e.path().to_string();
                let key = if key == "." { String::new() } else { key };
                return fail(key, e.into_inner());
            }
        };
        let base = path.parent().unwrap_or(Path::new("."));
        if let Source::File { path: p } = &mut cfg.source {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.checks.is_empty() {
            return fail("checks", "at least one check is required");
        }
        if self.levels.is_empty() {
            return fail("levels", "at least one resolution is required");
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return fail("levels", "resolutions must be strictly ascending");
        }
        if let Some(n) = self.levels.iter().find(|&&n| n < MIN_RESOLUTION) {
            return fail(
                "levels",
                format!("resolution {n} is below the minimum {MIN_RESOLUTION}"),
            );
        }
        let mesh = match build_mesh(&self.domain.at(self.levels[0])) {
            Ok(m) => m,
            Err(e) => return fail("domain", e),
        };
        for (i, check) in self.checks.iter().enumerate() {
            if let Err(e) = check.validate() {
                return fail(format!("checks[{i}]"), e);
            }
            let needs_modes = matches!(check, Check::Hks | Check::Chiti { eigenpair: 2, .. });
            if needs_modes && mesh.coordinates() == Coordinates::Radial {
                return fail(
                    format!("checks[{i}]"),
                    "a radial domain carries only rotationally symmetric modes",
                );
            }
        }
        if let Err(e) = self.source.validate() {
            return fail("source", e);
        }
        Ok(())
    }

    /// Where reports go: `SYMM_OUTPUT_DIR` when set, the configured directory otherwise.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os("SYMM_OUTPUT_DIR") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

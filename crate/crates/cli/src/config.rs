use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Environment variable naming a TOML config file.
pub const CONFIG_ENV: &str = "POLYTILE_CONFIG";

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Node budget of the torus solver.
    pub solve_budget: u64,
    /// Largest ruler length tried by `ruler search`.
    pub ruler_budget: u64,
    /// Largest torus (in cells) accepted by `solve` and `assemble`.
    pub max_torus_cells: usize,
    /// Default output directory.
    pub out_dir: PathBuf,
    /// Default `export` format.
    pub export_format: String,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            solve_budget: 10_000_000,
            ruler_budget: 128,
            max_torus_cells: 64,
            out_dir: PathBuf::from("polytile-out"),
            export_format: "cells".into(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Config = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// The file named by the environment, or defaults.
    pub fn from_env() -> Result<Self, String> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.solve_budget == 0 || self.ruler_budget == 0 || self.max_torus_cells == 0 {
            return Err("budgets and bounds must be positive".into());
        }
        Ok(())
    }
}

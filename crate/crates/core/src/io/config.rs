//! TOML configuration: the fit search grids and named test-function presets.
//!
//! ```toml
//! [fit]
//! primes = [3]
//! levels = [2, 3]
//!
//! [[preset]]
//! name = "demo"
//! real = { kind = "gaussian", center = 0.0, sigma = 2.0 }
//! finite = [{ prime = 2, kind = "omega" }]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adele::Preset;
use crate::error::{Error, Result};
use crate::fit::FitConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub fit: FitConfig,
    #[serde(rename = "preset")]
    pub presets: Vec<Preset>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        for (i, p) in self.presets.iter().enumerate() {
            p.function.validate()?;
            if self.presets[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Schema(format!("preset {:?} defined twice", p.name)));
            }
        }
        Ok(())
    }

    pub fn preset(&self, name: &str) -> Result<&Preset> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Schema(format!("no preset named {name:?}")))
    }
}

//! TOML experiment configuration. Every key is optional; command-line flags
//! take precedence over the file.
//!
//! ```toml
//! [table]
//! preset = "table1"
//! out = "results/table1"
//!
//! [fit_ppp]
//! support = "support.csv"
//! events = "events.csv"
//! q = 0.5
//! kappa = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{parse_link, CliError};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub table: TableConfig,
    #[serde(default)]
    pub fit_glm: FitGlmConfig,
    #[serde(default)]
    pub fit_ppp: FitPppConfig,
    #[serde(default)]
    pub verify_gev: VerifyGevConfig,
    #[serde(default)]
    pub verify_poisson: VerifyPoissonConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub preset: Option<String>,
    pub q: Option<f64>,
    pub links: Option<Vec<String>>,
    pub m: Option<Vec<u64>>,
    pub n: Option<usize>,
    pub kappa: Option<f64>,
    pub base_measure: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitGlmConfig {
    pub data: Option<PathBuf>,
    pub link: Option<String>,
    pub kappa: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitPppConfig {
    pub support: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub q: Option<f64>,
    pub kappa: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyGevConfig {
    pub links: Option<Vec<String>>,
    pub m: Option<Vec<u64>>,
    pub z: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPoissonConfig {
    pub link: Option<String>,
    pub support: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub m: Option<u64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub regions: Option<Vec<Vec<usize>>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub link: Option<String>,
    pub support: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub m: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.check_files()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(v) = p.as_mut() {
                if v.is_relative() {
                    *v = base.join(&*v);
                }
            }
        };
        fix(&mut self.table.out);
        fix(&mut self.fit_glm.data);
        fix(&mut self.fit_glm.out);
        fix(&mut self.fit_ppp.support);
        fix(&mut self.fit_ppp.data);
        fix(&mut self.fit_ppp.events);
        fix(&mut self.fit_ppp.out);
        fix(&mut self.verify_gev.out);
        fix(&mut self.verify_poisson.support);
        fix(&mut self.verify_poisson.out);
        fix(&mut self.simulate.support);
        fix(&mut self.simulate.out);
    }

    fn check_files(&self) -> Result<(), CliError> {
        let inputs = [
            &self.fit_glm.data,
            &self.fit_ppp.support,
            &self.fit_ppp.data,
            &self.fit_ppp.events,
            &self.verify_poisson.support,
            &self.simulate.support,
        ];
        for p in inputs.into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::config(format!("config refers to missing file {}", p.display())));
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let links = self
            .table
            .links
            .iter()
            .flatten()
            .chain(self.verify_gev.links.iter().flatten())
            .chain(&self.fit_glm.link)
            .chain(&self.verify_poisson.link)
            .chain(&self.simulate.link);
        for l in links {
            parse_link(l)?;
        }
        for k in [self.table.kappa, self.fit_glm.kappa, self.fit_ppp.kappa].into_iter().flatten() {
            check_kappa(k)?;
        }
        for m in [&self.table.m, &self.verify_gev.m].into_iter().flatten() {
            check_increasing(m)?;
        }
        Ok(())
    }
}

pub(crate) fn check_kappa(k: f64) -> Result<(), CliError> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!("kappa must be finite and nonnegative, got {k}")))
    }
}

pub(crate) fn check_increasing(m: &[u64]) -> Result<(), CliError> {
    if m.is_empty() {
        return Err(CliError::config("m list is empty"));
    }
    if m.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::config(format!("m list must be strictly increasing, got {m:?}")));
    }
    Ok(())
}

//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use qr_cauchy::data::TestProblem;
use qr_cauchy::forward_bvp::DEFAULT_TOL;
use qr_cauchy::params::{NoiseMode, RegParams, DEFAULT_C1, DEFAULT_K_ITERS};
use serde::{Deserialize, Serialize};

use crate::RunError;

/// Where the y-derivative of the measured datum comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    /// Noisy samples of the exact derivative on the solver mesh.
    #[default]
    Supplied,
    /// Differences of the noisy values on the sparse measurement mesh.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tests: Vec<String>,
    pub eps: Vec<f64>,
    pub seeds: Vec<u64>,
    pub c1: f64,
    pub k_iters: usize,
    pub mode: NoiseMode,
    /// The auxiliary problem is solved on a mesh `bvp_refine` times finer.
    pub bvp_refine: usize,
    pub bvp_tol: f64,
    pub derivative: DerivativeSource,
    /// Size the grid from `eps` but inject no noise.
    pub noiseless: bool,
    pub write_fields: bool,
    pub write_images: bool,
    /// Record wall-clock runtimes; off makes every output byte-reproducible.
    pub timing: bool,
    /// Worker threads, 0 = all cores.
    pub jobs: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tests: vec!["test1".into()],
            eps: vec![1e-1],
            seeds: vec![0, 1, 2, 3, 4],
            c1: DEFAULT_C1,
            k_iters: DEFAULT_K_ITERS,
            mode: NoiseMode::SmallNoise,
            bvp_refine: 1,
            bvp_tol: DEFAULT_TOL,
            derivative: DerivativeSource::Supplied,
            noiseless: false,
            write_fields: true,
            write_images: true,
            timing: true,
            jobs: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn problems(&self) -> Result<Vec<TestProblem>, RunError> {
        self.tests.iter().map(|t| TestProblem::by_name(t).map_err(RunError::from)).collect()
    }

    pub fn params(&self, eps: f64) -> Result<RegParams, RunError> {
        RegParams::new(eps, self.mode, self.c1, self.k_iters).map_err(|e| RunError::Config(format!("eps = {eps}: {e}")))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.tests.is_empty() {
            return Err(RunError::Config("no tests selected".into()));
        }
        if self.eps.is_empty() {
            return Err(RunError::Config("eps list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(RunError::Config("seed list is empty".into()));
        }
        if self.bvp_refine == 0 {
            return Err(RunError::Config("bvp_refine must be at least 1".into()));
        }
        self.problems()?;
        for &e in &self.eps {
            self.params(e)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let c = ExperimentConfig::from_toml("eps = [0.1, 0.01]\nseeds = [3]\n").unwrap();
        assert_eq!(c.eps, vec![0.1, 0.01]);
        assert_eq!(c.c1, 0.5);
        assert_eq!(c.k_iters, 3);
        assert_eq!(c.mode, NoiseMode::SmallNoise);
        c.validate().unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("epsilon = [0.1]").is_err());
        let mut c = ExperimentConfig::default();
        c.eps.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig { eps: vec![2.0], ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        c.mode = NoiseMode::LargeNoise;
        c.validate().unwrap();
        let c = ExperimentConfig { tests: vec!["nope".into()], ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
    }
}

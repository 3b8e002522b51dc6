use std::path::{Path, PathBuf};
use std::time::Duration;

use bo_core::benchmarks::{make_problem, FailureRegion};
use bo_core::gp::KernelFamily;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::method::Method;

/// Overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "BO_OUTPUT_DIR";

pub const DEFAULT_TOLERANCE_TARGET: f64 = -6.0;

/// A multi-seed benchmark campaign, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub problems: Vec<String>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub n_max: usize,
    #[serde(default = "default_kernel")]
    pub kernel: KernelFamily,
    /// Evaluation counts at which comparison tables are built; empty means
    /// `{200, 600, n_max}` restricted to `≤ n_max`.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub wall_clock_cap_secs: Option<f64>,
    #[serde(default)]
    pub noisy_incumbent: bool,
    #[serde(default)]
    pub hidden_constraints: bool,
    /// Additive observation noise, as a signal-to-noise ratio in dB.
    #[serde(default)]
    pub snr_db: Option<f64>,
    /// Failure region added to every problem.
    #[serde(default)]
    pub failure_region: Option<FailureRegion>,
    #[serde(default)]
    pub candidate_count: Option<usize>,
    #[serde(default)]
    pub n_init: Option<usize>,
    #[serde(default = "default_tolerance")]
    pub tolerance_target: f64,
}

fn default_kernel() -> KernelFamily {
    KernelFamily::SquaredExponential
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE_TARGET
}

impl CampaignConfig {
    pub fn new(problems: &[&str], methods: Vec<Method>, seeds: Vec<u64>, n_max: usize, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            problems: problems.iter().map(|p| p.to_string()).collect(),
            methods,
            seeds,
            n_max,
            kernel: default_kernel(),
            checkpoints: Vec::new(),
            output_dir: output_dir.into(),
            parallelism: 0,
            wall_clock_cap_secs: None,
            noisy_incumbent: false,
            hidden_constraints: false,
            snr_db: None,
            failure_region: None,
            candidate_count: None,
            n_init: None,
            tolerance_target: DEFAULT_TOLERANCE_TARGET,
        }
    }

    /// Parses TOML and applies the output-directory environment override.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut config: CampaignConfig = toml::from_str(text).map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                config.output_dir = PathBuf::from(dir);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.seeds.is_empty() {
            return bad("seeds must be nonempty".into());
        }
        if self.problems.is_empty() || self.methods.is_empty() {
            return bad("need at least one problem and one method".into());
        }
        for p in &self.problems {
            make_problem(p)?;
        }
        if let Some(&cp) = self.checkpoints.iter().find(|&&c| c > self.n_max || c == 0) {
            return bad(format!("checkpoint {cp} outside 1..={}", self.n_max));
        }
        if let Some(cap) = self.wall_clock_cap_secs {
            if !(cap > 0.0) {
                return bad(format!("wall_clock_cap_secs = {cap}"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if !self.seeds.iter().all(|s| seen.insert(*s)) {
            return bad("seeds must be distinct".into());
        }
        Ok(())
    }

    pub fn effective_checkpoints(&self) -> Vec<usize> {
        let mut cps = if self.checkpoints.is_empty() {
            let mut v: Vec<usize> = [200, 600].into_iter().filter(|&c| c < self.n_max).collect();
            v.push(self.n_max);
            v
        } else {
            self.checkpoints.clone()
        };
        cps.sort_unstable();
        cps.dedup();
        cps
    }

    pub fn wall_clock_cap(&self) -> Option<Duration> {
        self.wall_clock_cap_secs.map(Duration::from_secs_f64)
    }

    pub fn threads(&self) -> usize {
        if self.parallelism == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.parallelism
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
problems = ["CSF", "BRA"]
methods = ["RND", "ScaledEI", "NM-multistart"]
seeds = [1, 2, 3]
n_max = 50
kernel = "matern52"
output_dir = "out"

[failure_region]
shape = "disc"
center = [2.5, 7.5]
radius = 4.0
"#;

    #[test]
    fn parses_and_validates() {
        let c = CampaignConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.methods.len(), 3);
        assert_eq!(c.kernel, KernelFamily::Matern52);
        assert_eq!(c.effective_checkpoints(), vec![50]);
        assert!(matches!(c.failure_region, Some(FailureRegion::Disc { .. })));
        assert!(CampaignConfig::from_toml_str(&SAMPLE.replace("[1, 2, 3]", "[]")).is_err());
        assert!(CampaignConfig::from_toml_str(&SAMPLE.replace("\"CSF\"", "\"XYZ\"")).is_err());
        let mut long = c.clone();
        long.n_max = 1000;
        assert_eq!(long.effective_checkpoints(), vec![200, 600, 1000]);
        long.checkpoints = vec![1001];
        assert!(long.validate().is_err());
    }
}

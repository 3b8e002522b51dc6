use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bo_core::benchmarks::{make_constrained_problem, make_problem, BenchmarkProblem, NoiseSpec};
use bo_core::engine::{self, BoConfig, RunTrace};
use bo_core::gp::KernelSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::nelder_mead_multistart;
use crate::config::CampaignConfig;
use crate::error::{HarnessError, Result};
use crate::method::Method;

pub const CONFIG_FILE: &str = "campaign.json";
pub const RUNS_DIR: &str = "runs";

/// Identifies one run of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunKey {
    pub problem: String,
    pub method: Method,
    pub seed: u64,
}

impl RunKey {
    pub fn stem(&self) -> String {
        format!("{}__{}__seed{}", self.problem, self.method.slug(), self.seed)
    }
}

/// Persisted result of a run. Holds nothing time-dependent so reruns are
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub key: RunKey,
    pub f_glob: f64,
    pub dims: usize,
    pub trace: RunTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub key: RunKey,
    pub f_glob: f64,
    pub dims: usize,
    /// `Err` holds the message of a run that did not complete.
    pub trace: std::result::Result<RunTrace, String>,
    pub wall_time_s: Option<f64>,
    /// Loaded from disk instead of being executed.
    pub resumed: bool,
}

impl RunRecord {
    pub fn ok_trace(&self) -> Option<&RunTrace> {
        self.trace.as_ref().ok()
    }
}

/// Every run of a campaign, in (problem, method, seed) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub config: CampaignConfig,
    pub runs: Vec<RunRecord>,
}

impl Archive {
    pub fn runs_for<'a>(&'a self, problem: &'a str, method: &'a Method) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.key.problem == problem && &r.key.method == method)
    }

    pub fn failed_runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.trace.is_err())
    }

    /// Reads a campaign directory written by [`run_campaign`].
    pub fn load(dir: &Path) -> Result<Self> {
        let config_path = dir.join(CONFIG_FILE);
        let text = fs::read_to_string(&config_path).map_err(|e| HarnessError::io(&config_path, e))?;
        let mut config: CampaignConfig = serde_json::from_str(&text).map_err(|e| HarnessError::parse(&config_path, e))?;
        config.output_dir = dir.to_path_buf();
        let mut runs = Vec::new();
        for key in run_keys(&config) {
            let path = trace_path(dir, &key);
            let rec = match read_trace(&path)? {
                Some(t) => RunRecord {
                    f_glob: t.f_glob,
                    dims: t.dims,
                    trace: Ok(t.trace),
                    wall_time_s: read_meta(&meta_path(dir, &key)).map(|m| m.wall_time_s),
                    resumed: true,
                    key,
                },
                None => RunRecord { trace: Err("missing trace file".into()), f_glob: f64::NAN, dims: 0, wall_time_s: None, resumed: true, key },
            };
            runs.push(rec);
        }
        if runs.is_empty() {
            return Err(HarnessError::EmptyArchive);
        }
        Ok(Archive { config, runs })
    }
}

pub fn run_keys(config: &CampaignConfig) -> Vec<RunKey> {
    let mut keys = Vec::new();
    for p in &config.problems {
        let problem = p.to_ascii_uppercase();
        for m in &config.methods {
            for &seed in &config.seeds {
                keys.push(RunKey { problem: problem.clone(), method: *m, seed });
            }
        }
    }
    keys
}

pub fn trace_path(dir: &Path, key: &RunKey) -> PathBuf {
    dir.join(RUNS_DIR).join(format!("{}.json", key.stem()))
}

fn meta_path(dir: &Path, key: &RunKey) -> PathBuf {
    dir.join(RUNS_DIR).join(format!("{}.meta.json", key.stem()))
}

fn read_trace(path: &Path) -> Result<Option<TraceFile>> {
    match fs::read_to_string(path) {
        Ok(text) => match serde_json::from_str(&text) {
            Ok(t) => Ok(Some(t)),
            // A torn write from an interrupted campaign; the run is redone.
            Err(_) => Ok(None),
        },
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(HarnessError::io(path, e)),
    }
}

fn read_meta(path: &Path) -> Option<RunMeta> {
    serde_json::from_str(&fs::read_to_string(path).ok()?).ok()
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

/// The benchmark as configured: base problem plus the campaign's failure region.
pub fn campaign_problem(config: &CampaignConfig, name: &str) -> Result<BenchmarkProblem> {
    Ok(match &config.failure_region {
        Some(region) => make_constrained_problem(name, region.clone())?,
        None => make_problem(name)?,
    })
}

/// Engine configuration for one BO run of the campaign.
pub fn bo_config(config: &CampaignConfig, problem: &BenchmarkProblem, kind: bo_core::acquisition::AcquisitionKind, seed: u64) -> BoConfig {
    let mut c = BoConfig::new(problem.domain.clone(), kind, config.n_max, seed);
    c.kernel = KernelSpec::new(config.kernel, problem.dims);
    c.noisy_incumbent = config.noisy_incumbent;
    c.hidden_constraints = config.hidden_constraints;
    c.wall_clock_cap = config.wall_clock_cap();
    if let Some(n) = config.candidate_count {
        c.candidate_count = n;
    }
    if let Some(n) = config.n_init {
        c.n_init = n;
    }
    c
}

/// Executes one run. Noise, when configured, is seeded by the run seed alone
/// so every method sees the same noise stream.
pub fn execute_run(config: &CampaignConfig, problem: &BenchmarkProblem, method: &Method, seed: u64) -> Result<RunTrace> {
    let noise = config.snr_db.map(|snr| NoiseSpec::new(problem, snr, seed));
    let mut objective = problem.objective(noise);
    match method {
        Method::Bo(kind) => Ok(engine::run(&bo_config(config, problem, *kind, seed), &mut objective)?),
        Method::NelderMeadMultistart { starts } => nelder_mead_multistart(&problem.domain, *starts, config.n_max, seed, &mut objective),
    }
}

/// Runs every (problem, method, seed) combination, writing each trace as it
/// completes. Runs whose trace file already exists are loaded, not rerun.
/// A failing run is recorded in the archive and does not stop the others.
pub fn run_campaign(config: &CampaignConfig) -> Result<Archive> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir.join(RUNS_DIR)).map_err(|e| HarnessError::io(dir, e))?;
    let config_json = serde_json::to_vec_pretty(config).map_err(|e| HarnessError::parse(dir.join(CONFIG_FILE), e))?;
    write_atomic(&dir.join(CONFIG_FILE), &config_json)?;

    let mut problems = std::collections::HashMap::new();
    for name in &config.problems {
        problems.insert(name.to_ascii_uppercase(), campaign_problem(config, name)?);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads())
        .build()
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let keys = run_keys(config);
    let runs: Vec<Result<RunRecord>> = pool.install(|| {
        keys.into_par_iter()
            .map(|key| {
                let problem = &problems[&key.problem];
                let path = trace_path(dir, &key);
                if let Some(t) = read_trace(&path)? {
                    return Ok(RunRecord {
                        f_glob: t.f_glob,
                        dims: t.dims,
                        trace: Ok(t.trace),
                        wall_time_s: read_meta(&meta_path(dir, &key)).map(|m| m.wall_time_s),
                        resumed: true,
                        key,
                    });
                }
                let start = Instant::now();
                let outcome = execute_run(config, problem, &key.method, key.seed);
                let wall = start.elapsed().as_secs_f64();
                let trace = match outcome {
                    Ok(trace) => {
                        let file = TraceFile { key: key.clone(), f_glob: problem.f_glob, dims: problem.dims, trace };
                        let bytes = serde_json::to_vec(&file).map_err(|e| HarnessError::parse(&path, e))?;
                        write_atomic(&path, &bytes)?;
                        let meta = serde_json::to_vec(&RunMeta { wall_time_s: wall }).expect("plain struct");
                        write_atomic(&meta_path(dir, &key), &meta)?;
                        Ok(file.trace)
                    }
                    Err(e) => Err(e.to_string()),
                };
                Ok(RunRecord { key, f_glob: problem.f_glob, dims: problem.dims, trace, wall_time_s: Some(wall), resumed: false })
            })
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Archive { config: config.clone(), runs })
}

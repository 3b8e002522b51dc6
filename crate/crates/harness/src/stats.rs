use bo_core::benchmarks::log10_distance;
use bo_core::engine::RunTrace;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::campaign::{Archive, RunRecord};
use crate::error::{HarnessError, Result};
use crate::method::Method;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// log₁₀ distance of the incumbent after each evaluation; `None` before the
/// first success.
pub fn distance_trace(trace: &RunTrace, f_glob: f64) -> Vec<Option<f64>> {
    trace.records.iter().map(|r| r.f_min.map(|f| log10_distance(f, f_glob))).collect()
}

/// Distance after `n` evaluations, or after the last one for a run that
/// stopped early.
pub fn distance_at(trace: &RunTrace, f_glob: f64, n: usize) -> Option<f64> {
    let idx = n.min(trace.records.len()).checked_sub(1)?;
    trace.records[idx].f_min.map(|f| log10_distance(f, f_glob))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean across seeds.
    pub sem: f64,
}

/// Mean and standard error of the sample over seeds.
pub fn mean_sem(values: &[f64]) -> (f64, f64) {
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], if values.len() < 2 { f64::NAN } else { 0.0 });
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Per-evaluation mean ± SEM of the log₁₀ distance over the seeds of one
/// (problem, method) pair, from `n_init` to the shortest run's length.
/// Evaluations at which some seed has no incumbent yet are left out.
pub fn distance_summary(archive: &Archive, problem: &str, method: &Method) -> Result<Vec<SummaryPoint>> {
    let runs: Vec<&RunRecord> = archive.runs_for(problem, method).filter(|r| r.trace.is_ok()).collect();
    summarize_runs(&runs)
}

pub(crate) fn summarize_runs(runs: &[&RunRecord]) -> Result<Vec<SummaryPoint>> {
    if runs.len() < 2 {
        return Err(HarnessError::InsufficientSeeds { have: runs.len() });
    }
    let traces: Vec<Vec<Option<f64>>> = runs.iter().map(|r| distance_trace(r.ok_trace().unwrap(), r.f_glob)).collect();
    let start = runs.iter().map(|r| r.ok_trace().unwrap().n_init).max().unwrap().max(1);
    let end = traces.iter().map(Vec::len).min().unwrap();
    let mut out = Vec::new();
    for n in start..=end {
        let vals: Option<Vec<f64>> = traces.iter().map(|t| t[n - 1]).collect();
        if let Some(vals) = vals {
            let (mean, sem) = mean_sem(&vals);
            out.push(SummaryPoint { n, mean, sem });
        }
    }
    Ok(out)
}

/// Outcome of comparing a reference method with a competitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    /// +1: the reference reached a significantly lower distance, −1: the
    /// competitor did, 0: no significant difference.
    pub code: i8,
    pub p_value: f64,
    /// Mean of `competitor − reference`.
    pub mean_diff: f64,
    pub t_statistic: f64,
    pub pairs: usize,
}

/// Two-sided paired t-test on `b − a`. Coded +1 when `a` is significantly
/// lower. Constant nonzero differences count as significant with p = 0;
/// identical samples give code 0 with p = 1.
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<ComparisonCell> {
    if a.len() != b.len() {
        return Err(HarnessError::DegeneratePairs(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(HarnessError::InsufficientSeeds { have: a.len() });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(HarnessError::DegeneratePairs("non-finite difference".into()));
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sign = |m: f64| if m > 0.0 { 1 } else if m < 0.0 { -1 } else { 0 };
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            ComparisonCell { code: 0, p_value: 1.0, mean_diff: 0.0, t_statistic: 0.0, pairs: d.len() }
        } else {
            ComparisonCell { code: sign(mean), p_value: 0.0, mean_diff: mean, t_statistic: mean.signum() * f64::INFINITY, pairs: d.len() }
        });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("n ≥ 2");
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    let code = if p < alpha { sign(mean) } else { 0 };
    Ok(ComparisonCell { code, p_value: p, mean_diff: mean, t_statistic: t, pairs: d.len() })
}

/// Same/Better/Worse shares of one column, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub same: f64,
    pub better: f64,
    pub worse: f64,
    pub cells: usize,
}

impl Tally {
    fn from_codes(codes: impl Iterator<Item = i8>) -> Self {
        let (mut s, mut b, mut w) = (0usize, 0usize, 0usize);
        for c in codes {
            match c {
                1 => b += 1,
                -1 => w += 1,
                _ => s += 1,
            }
        }
        let total = s + b + w;
        let pct = |k: usize| if total == 0 { f64::NAN } else { 100.0 * k as f64 / total as f64 };
        Tally { same: pct(s), better: pct(b), worse: pct(w), cells: total }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub reference: Method,
    pub checkpoint: usize,
    pub alpha: f64,
    pub problems: Vec<String>,
    pub competitors: Vec<Method>,
    /// `cells[problem][competitor]`; `None` when fewer than two seeds pair up.
    pub cells: Vec<Vec<Option<ComparisonCell>>>,
    /// One tally per competitor.
    pub tallies: Vec<Tally>,
    pub overall: Tally,
    /// Human-readable notes on runs that were missing or failed.
    pub missing: Vec<String>,
}

/// Paired comparison of `reference` against `competitor` on one problem at
/// evaluation `checkpoint`, pairing runs by seed.
pub fn compare_methods(
    archive: &Archive,
    problem: &str,
    reference: &Method,
    competitor: &Method,
    checkpoint: usize,
    alpha: f64,
    missing: &mut Vec<String>,
) -> Option<ComparisonCell> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in archive.runs_for(problem, reference) {
        let Some(other) = archive.runs_for(problem, competitor).find(|o| o.key.seed == r.key.seed) else {
            missing.push(format!("{problem} {competitor} seed {}: no run", r.key.seed));
            continue;
        };
        let da = r.ok_trace().and_then(|t| distance_at(t, r.f_glob, checkpoint));
        let db = other.ok_trace().and_then(|t| distance_at(t, other.f_glob, checkpoint));
        match (da, db) {
            (Some(x), Some(y)) => {
                a.push(x);
                b.push(y);
            }
            _ => missing.push(format!("{problem} seed {}: {reference} or {competitor} has no distance at n = {checkpoint}", r.key.seed)),
        }
    }
    match paired_t_test(&a, &b, alpha) {
        Ok(cell) => Some(cell),
        Err(e) => {
            missing.push(format!("{problem} {reference} vs {competitor}: {e}"));
            None
        }
    }
}

/// Table of paired t-tests of `reference` against every other method of the
/// archive, one row per problem, with Same/Better/Worse percentages.
pub fn comparison_table(archive: &Archive, reference: &Method, checkpoint: usize, alpha: f64) -> Result<ComparisonTable> {
    if !archive.config.methods.contains(reference) {
        return Err(HarnessError::MissingReference(reference.to_string()));
    }
    let problems: Vec<String> = archive.config.problems.iter().map(|p| p.to_ascii_uppercase()).collect();
    let competitors: Vec<Method> = archive.config.methods.iter().filter(|m| *m != reference).copied().collect();
    let mut missing = Vec::new();
    let cells: Vec<Vec<Option<ComparisonCell>>> = problems
        .iter()
        .map(|p| competitors.iter().map(|c| compare_methods(archive, p, reference, c, checkpoint, alpha, &mut missing)).collect())
        .collect();
    let tallies = (0..competitors.len())
        .map(|j| Tally::from_codes(cells.iter().filter_map(|row| row[j].map(|c| c.code))))
        .collect();
    let overall = Tally::from_codes(cells.iter().flatten().filter_map(|c| c.map(|c| c.code)));
    Ok(ComparisonTable { reference: *reference, checkpoint, alpha, problems, competitors, cells, tallies, overall, missing })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSummary {
    pub method: Method,
    pub runs: usize,
    pub reached: usize,
    pub censored: usize,
    /// Over runs that reached the target; `None` when none did.
    pub mean_evals: Option<f64>,
    pub sem: Option<f64>,
    /// Over all runs, with censored runs counted at their evaluation count.
    pub mean_evals_censored: f64,
}

/// First evaluation count at which the log₁₀ distance is at most `target`.
pub fn evals_to_target(trace: &RunTrace, f_glob: f64, target: f64) -> Option<usize> {
    distance_trace(trace, f_glob).iter().position(|d| d.is_some_and(|d| d <= target)).map(|i| i + 1)
}

/// Evaluations needed to reach `target`, per method of the archive.
pub fn evals_to_tolerance(archive: &Archive, problem: &str, target: f64) -> Vec<ToleranceSummary> {
    archive
        .config
        .methods
        .iter()
        .map(|m| {
            let mut hits = Vec::new();
            let mut all = Vec::new();
            let mut runs = 0;
            for r in archive.runs_for(problem, m) {
                let Some(t) = r.ok_trace() else { continue };
                runs += 1;
                match evals_to_target(t, r.f_glob, target) {
                    Some(n) => {
                        hits.push(n as f64);
                        all.push(n as f64);
                    }
                    None => all.push(t.evaluations() as f64),
                }
            }
            let (mean_evals, sem) = match hits.len() {
                0 => (None, None),
                1 => (Some(hits[0]), None),
                _ => {
                    let (m, s) = mean_sem(&hits);
                    (Some(m), Some(s))
                }
            };
            let mean_evals_censored = if all.is_empty() { f64::NAN } else { all.iter().sum::<f64>() / all.len() as f64 };
            ToleranceSummary { method: *m, runs, reached: hits.len(), censored: runs - hits.len(), mean_evals, sem, mean_evals_censored }
        })
        .collect()
}

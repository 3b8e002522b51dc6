use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use bo_core::acquisition::AcquisitionKind;
use bo_core::benchmarks::{log10_distance, make_problem, run_oracle, FailureRegion, OracleOptions};
use bo_core::gp::KernelFamily;
use bo_harness::{
    campaign_problem, comparison_table, default_reference, emit_reports, evals_to_tolerance, execute_run, render_comparison_table, run_campaign, trace_to_csv,
    Archive, CampaignConfig, Method, DEFAULT_ALPHA, OUTPUT_DIR_ENV,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bo-bench", version, about = "Bayesian-optimization benchmark campaigns and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Base seed (repeat to give several for `run`).
    #[arg(long)]
    seed: Vec<u64>,
    /// Total evaluation budget, design included.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_parser = parse_kernel)]
    kernel: Option<KernelFamily>,
    /// Exploration weight of LCB.
    #[arg(long)]
    kappa: Option<f64>,
    /// Take the incumbent from the posterior mean at the observed inputs.
    #[arg(long)]
    noisy_incumbent: bool,
    /// Model evaluation failures with a second GP.
    #[arg(long)]
    hidden_constraints: bool,
    /// Failure region as JSON, e.g. '{"shape":"disc","center":[2.5,7.5],"radius":4}'.
    #[arg(long)]
    failure_region: Option<String>,
    /// Observation noise as a signal-to-noise ratio in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign from a TOML config, then write reports.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// A single run of one method on one problem.
    Bench {
        problem: String,
        method: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Tables and plots for an existing campaign directory.
    Report {
        archive: PathBuf,
        #[arg(long)]
        checkpoint: Vec<usize>,
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Recompute a problem's global minimum and certify it.
    Oracle {
        problem: String,
        /// Smaller grid and fewer samples.
        #[arg(long)]
        coarse: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_kernel(s: &str) -> Result<KernelFamily, String> {
    s.parse()
}

fn apply_flags(config: &mut CampaignConfig, flags: &RunFlags) -> anyhow::Result<()> {
    if !flags.seed.is_empty() {
        config.seeds = flags.seed.clone();
    }
    if let Some(n) = flags.n_max {
        config.n_max = n;
        config.checkpoints.retain(|&c| c <= n);
    }
    if let Some(k) = flags.kernel {
        config.kernel = k;
    }
    if let Some(kappa) = flags.kappa {
        for m in &mut config.methods {
            if let Method::Bo(AcquisitionKind::Lcb { kappa: k }) = m {
                *k = kappa;
            }
        }
    }
    config.noisy_incumbent |= flags.noisy_incumbent;
    config.hidden_constraints |= flags.hidden_constraints;
    if let Some(text) = &flags.failure_region {
        let region: FailureRegion = serde_json::from_str(text).context("parsing --failure-region")?;
        config.failure_region = Some(region);
    }
    if flags.snr_db.is_some() {
        config.snr_db = flags.snr_db;
    }
    if let Some(dir) = &flags.output_dir {
        config.output_dir = dir.clone();
    }
    config.validate()?;
    Ok(())
}

fn print_tables(archive: &Archive, checkpoints: &[usize], reference: Option<Method>, alpha: f64) -> anyhow::Result<()> {
    if archive.config.methods.len() > 1 {
        let reference = reference.unwrap_or_else(|| default_reference(archive));
        for &cp in checkpoints {
            println!("{}", render_comparison_table(&comparison_table(archive, &reference, cp, alpha)?));
        }
    }
    let target = archive.config.tolerance_target;
    for p in &archive.config.problems {
        println!("{} evaluations to log10 distance <= {target}:", p.to_ascii_uppercase());
        for t in evals_to_tolerance(archive, &p.to_ascii_uppercase(), target) {
            let mean = t.mean_evals.map_or("n/a".into(), |m| format!("{m:.1}"));
            println!("  {:<15} reached {}/{}  mean {mean}  mean with censoring {:.1}", t.method.to_string(), t.reached, t.runs, t.mean_evals_censored);
        }
    }
    for r in archive.failed_runs() {
        println!("failed: {} {} seed {}: {}", r.key.problem, r.key.method, r.key.seed, r.trace.as_ref().unwrap_err());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { config, flags, parallelism } => {
            let mut cfg = CampaignConfig::load(&config)?;
            apply_flags(&mut cfg, &flags)?;
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            let start = Instant::now();
            let archive = run_campaign(&cfg)?;
            let resumed = archive.runs.iter().filter(|r| r.resumed).count();
            println!("{} runs ({resumed} resumed) in {:.1} s -> {}", archive.runs.len(), start.elapsed().as_secs_f64(), cfg.output_dir.display());
            let files = emit_reports(&archive, &cfg.output_dir)?;
            println!("wrote {} CSVs, {} tables, {} plots", files.run_csvs.len(), files.tables.len(), files.plots.len());
            print_tables(&archive, &cfg.effective_checkpoints(), None, DEFAULT_ALPHA)?;
            let ok = archive.failed_runs().next().is_none();
            Ok(ok)
        }
        Command::Bench { problem, method, flags } => {
            let method: Method = method.parse()?;
            let mut cfg = CampaignConfig::new(&[problem.as_str()], vec![method], vec![0], 200, ".");
            apply_flags(&mut cfg, &flags)?;
            if cfg.seeds.len() != 1 {
                bail!("bench takes a single --seed");
            }
            let seed = cfg.seeds[0];
            let p = campaign_problem(&cfg, &problem)?;
            let start = Instant::now();
            let trace = execute_run(&cfg, &p, &cfg.methods[0], seed)?;
            let wall = start.elapsed().as_secs_f64();
            let step = (trace.evaluations() / 10).max(1);
            for r in trace.records.iter().filter(|r| r.n % step == 0 || r.n == trace.n_init) {
                let d = r.f_min.map_or("n/a".into(), |f| format!("{:.3}", log10_distance(f, p.f_glob)));
                println!("n = {:>5}  f_min = {:<24}  log10 distance = {d}", r.n, r.f_min.map_or("n/a".into(), |f| format!("{f:.12e}")));
            }
            let d = trace.f_min.map(|f| log10_distance(f, p.f_glob));
            println!(
                "{} {} seed {seed}: {} evaluations, {} failures, final log10 distance {}, {wall:.2} s{}",
                p.name(),
                cfg.methods[0],
                trace.evaluations(),
                trace.failures(),
                d.map_or("n/a".into(), |d| format!("{d:.4}")),
                if trace.truncated { " (truncated)" } else { "" }
            );
            if let Some(dir) = &flags.output_dir {
                std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
                let path = dir.join(format!("{}__{}__seed{seed}.csv", p.name(), cfg.methods[0].slug()));
                std::fs::write(&path, trace_to_csv(&trace, p.f_glob, p.dims)?).with_context(|| path.display().to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Report { archive, checkpoint, reference, alpha } => {
            let archive = Archive::load(&archive)?;
            let files = emit_reports(&archive, &archive.config.output_dir)?;
            println!("wrote {} CSVs, {} tables, {} plots", files.run_csvs.len(), files.tables.len(), files.plots.len());
            let cps = if checkpoint.is_empty() { archive.config.effective_checkpoints() } else { checkpoint };
            let reference = reference.map(|r| r.parse::<Method>()).transpose()?;
            print_tables(&archive, &cps, reference, alpha)?;
            Ok(true)
        }
        Command::Oracle { problem, coarse, seed } => {
            let p = make_problem(&problem)?;
            let mut opts = if coarse { OracleOptions::coarse() } else { OracleOptions::default() };
            opts.seed = seed;
            let start = Instant::now();
            let rep = run_oracle(&p, &opts)?;
            let err = (rep.f_best - p.f_glob).abs();
            let value_ok = err <= 1e-6;
            println!("{}: f_best = {:.12}  reference f_glob = {:.12}  |diff| = {err:.3e}  ({} samples, {:.1} s)", p.name(), rep.f_best, p.f_glob, rep.sample_count, start.elapsed().as_secs_f64());
            println!("x_best = {:?}", rep.x_best);
            let mut counts_ok = true;
            if rep.minima_counted {
                counts_ok = rep.global_minima.len() as u64 == p.n_global;
                println!("global minima found {} (expected {}), local minima found {} (listed {})", rep.global_minima.len(), p.n_global, rep.local_minima.len(), p.n_local);
            }
            let ok = value_ok && counts_ok;
            println!("certification: {}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

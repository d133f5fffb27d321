use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvmd::config::RunConfig;
use cvmd::harness::{case1, case2, case3, check};
use cvmd::CvmdError;

#[derive(Parser)]
#[command(name = "cvmd", about = "WCA molecular dynamics with conservative control-volume accounting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Plain-text `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of production steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Output directory for CSV emission.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic-box NVE conservation budgets (balance residual series).
    Case1(CommonArgs),
    /// Equilibrium virial vs control-volume scalar pressure convergence.
    Case2(CommonArgs),
    /// Start-up Couette flow: profiles, VA/MOP stress, whole-liquid balance.
    Case3(CommonArgs),
    /// Run the invariant and property suite.
    Check(CommonArgs),
}

fn load_config(common: &CommonArgs, base: RunConfig) -> Result<RunConfig, CvmdError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::parse_file(path, base)?,
        None => base,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(steps) = common.steps {
        cfg.steps = steps;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run() -> Result<u8, CvmdError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Case1(common) => {
            let cfg = load_config(&common, RunConfig::default())?;
            let summary = case1::run_case1(&cfg, Some(&common.out))?;
            println!(
                "case1: {} samples, mass violations {}/{}, max momentum residual ratio {:.3e}, energy error ratio {:.4}%",
                summary.samples,
                summary.mass_violations,
                summary.mass_checks,
                summary.max_momentum_residual_ratio,
                100.0 * summary.energy_error_ratio
            );
            Ok(0)
        }
        Command::Case2(common) => {
            let cfg = load_config(&common, RunConfig::case2())?;
            let s = case2::run_case2(&cfg, Some(&common.out))?;
            println!(
                "case2: T = {:.4}, virial (k {:.4}, c {:.4}, total {:.4}) vs CV (k {:.4}, c {:.4}, total {:.4})",
                s.mean_temperature, s.kappa_vir, s.conf_vir, s.pi_vir, s.kappa_cv, s.conf_cv, s.pi_cv
            );
            println!(
                "case2: PD(total) {:.3}% (half-run {:.3}%), SD kappa cv/vir {:.4}/{:.4}, sigma cv/vir {:.4}/{:.4}",
                s.pd_total_end, s.pd_total_half, s.sd_kappa_cv, s.sd_kappa_vir, s.sd_conf_cv, s.sd_conf_vir
            );
            Ok(0)
        }
        Command::Case3(common) => {
            let cfg = load_config(&common, RunConfig::case3())?;
            let s = case3::run_case3(&cfg, Some(&common.out))?;
            for (t, rms) in &s.velocity_rms {
                println!("case3: velocity rms(t = {t}) = {:.4} U0", rms);
            }
            println!(
                "case3: liquid-CV max momentum residual {:.3e}; wall T {:.3}/{:.3}; fluid T {:.3}",
                s.max_liquid_residual_rel, s.wall_temp_bottom, s.wall_temp_top, s.fluid_temp
            );
            Ok(0)
        }
        Command::Check(common) => {
            let cfg = load_config(&common, RunConfig::default())?;
            let failures = check::run_check(&cfg)?;
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e @ CvmdError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

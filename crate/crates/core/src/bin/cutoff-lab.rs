//! Experiment CLI: run config-driven cutoff experiments, audit the
//! structural hypotheses of a configuration, or evaluate the exact
//! Slutsky counterexample distances.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cutoff_lab::distance;
use cutoff_lab::lab::runner::{self, RunOptions};
use cutoff_lab::lab::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cutoff-lab", version, about = "Total-variation cutoff laboratory for small-noise Levy SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment pipeline and write report.json + CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores). Results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Proceed even when the hypothesis audits fail.
        #[arg(long)]
        force_audits: bool,
    },
    /// Audit the structural hypotheses (coercivity, equator, moments, cone).
    Audit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Exact Slutsky-counterexample distances for (n, a_n).
    Slutsky {
        #[arg(long)]
        n: usize,
        /// Support width a_n: a float, or "n^<exponent>" (e.g. "n^-0.5").
        #[arg(long)]
        an: String,
    },
}

fn parse_an(n: usize, text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    if let Some(rest) = t.strip_prefix("n^") {
        let e: f64 = rest.parse().map_err(|_| format!("bad exponent in '{text}'"))?;
        return Ok((n as f64).powf(e));
    }
    Err(format!("cannot parse a_n expression '{text}' (use a float or n^<exp>)"))
}

fn set_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed, threads, force_audits } => {
            set_threads(threads);
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let mut cfg = match ExperimentConfig::from_toml(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.experiment.seed = s;
            }
            let opts = RunOptions { force_audits, ..Default::default() };
            match runner::run_all(cfg, &opts) {
                Ok(report) => {
                    if let Err(e) = report.write_to(&out) {
                        eprintln!("error: cannot write report: {e}");
                        return ExitCode::from(2);
                    }
                    println!("report written to {}", out.display());
                    for (flag, ok) in &report.flags {
                        println!("  {:<32} {}", flag, if *ok { "pass" } else { "FAIL" });
                    }
                    if report.all_flags_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Audit { config, threads } => {
            set_threads(threads);
            let run = || -> cutoff_lab::Result<bool> {
                let text = std::fs::read_to_string(&config)?;
                let cfg = ExperimentConfig::from_toml(&text)?;
                let ctx = runner::LabContext::new(cfg)?;
                let audit = runner::run_audits(&ctx)?;
                println!("coercivity: min quadratic form {:.6}, min secant form {:.6} -> {}",
                    audit.coercivity_min_jacobian,
                    audit.coercivity_min_secant,
                    if audit.coercivity_pass { "pass" } else { "FAIL" });
                println!("equator: essinf c0 {:.6}, span rank {}, min directional mass {:.6} -> {}",
                    audit.equator_essinf_c0,
                    audit.equator_rank,
                    audit.equator_min_directional_mass,
                    if audit.equator_pass { "pass" } else { "FAIL" });
                println!("tail moment: integral {:.6} -> {}",
                    audit.tail_moment_value,
                    if audit.tail_moment_pass { "pass" } else { "FAIL" });
                println!("Orey-Masuda cone bound -> {}", if audit.orey_masuda_pass { "pass" } else { "FAIL" });
                Ok(audit.coercivity_pass && audit.equator_pass && audit.tail_moment_pass && audit.orey_masuda_pass)
            };
            match run() {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Slutsky { n, an } => {
            let a_n = match parse_an(n, &an) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match distance::slutsky_demo(n, a_n) {
                Ok(r) => {
                    println!("n = {}, a_n = {:.6e}", r.n, r.a_n);
                    println!("tv(X_n, U)          = {:.6}", r.tv_xn_vs_u);
                    println!("tv(X_n + Y_n, U)    = {:.6}", r.tv_sum_vs_u);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use comp_cast::harness::{
    analyze, demand_profile_output, parse_config, simulate, sweep_alpha, threshold_reports,
    write_file, write_outputs, ConfigError, HarnessError, SimConfig,
};

#[derive(Parser)]
#[command(name = "comp-cast", version, about = "Broadcast versus unicast delivery over cooperative base stations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Spf {
    /// Unicast spectral efficiency in b/s/Hz.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    spf_uni: f64,
    /// Broadcast spectral efficiency in b/s/Hz.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    spf_bc: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimation followed by the threshold analysis.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        threads: Option<usize>,
        /// Credit every parallel unicast stream to the unicast efficiency.
        #[arg(long)]
        credit_streams: bool,
    },
    /// Threshold analysis from given spectral efficiencies.
    Threshold {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spf: Spf,
    },
    /// Cost curves over the threshold for every configured alpha.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spf: Spf,
    },
    /// Expected requests per rank with the mode split at a threshold.
    Demand {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spf: Spf,
        /// Popularity exponent; defaults to the first configured value.
        #[arg(long)]
        alpha: Option<f64>,
        /// Threshold rank; defaults to the optimal one.
        #[arg(long)]
        threshold: Option<usize>,
    },
}

fn load(common: &Common) -> Result<SimConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn check_spf(spf: &Spf) -> Result<(), ConfigError> {
    for (name, v) in [("--spf-uni", spf.spf_uni), ("--spf-bc", spf.spf_bc)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::Invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate {
            common,
            threads,
            credit_streams,
        } => {
            let mut cfg = load(&common)?;
            cfg.credit_streams = credit_streams;
            if threads == Some(0) {
                return Err(ConfigError::Invalid("--threads must be at least 1".into()).into());
            }
            let report = simulate(&cfg, threads)?;
            for path in write_outputs(&report, &cfg.out_dir)? {
                println!("wrote {}", path.display());
            }
            let e = report.estimate.as_ref().expect("simulate always estimates");
            println!(
                "spf_uni = {:.4} +- {:.4}, spf_bc = {:.4} +- {:.4}, ratio = {:.3}",
                e.mean_uni,
                e.se_uni,
                e.mean_bc,
                e.se_bc,
                e.ratio()
            );
        }
        Command::Threshold { common, spf } => {
            let cfg = load(&common)?;
            check_spf(&spf)?;
            let report = analyze(&cfg, spf.spf_uni, spf.spf_bc, None)?;
            let text = report.to_key_values();
            let path = write_file(&cfg.out_dir, "run_report.txt", &text)?;
            print!("{text}");
            println!("wrote {}", path.display());
        }
        Command::Sweep { common, spf } => {
            let cfg = load(&common)?;
            check_spf(&spf)?;
            let csv = sweep_alpha(&cfg, spf.spf_uni, spf.spf_bc)?;
            println!("wrote {}", write_file(&cfg.out_dir, "cost_curves.csv", &csv)?.display());
        }
        Command::Demand {
            common,
            spf,
            alpha,
            threshold,
        } => {
            let mut cfg = load(&common)?;
            check_spf(&spf)?;
            if let Some(a) = alpha {
                cfg.alpha = vec![a];
                cfg.validate()?;
            }
            let i_th = match threshold {
                Some(t) => t,
                None => threshold_reports(&cfg, spf.spf_uni, spf.spf_bc)?[0].argmin,
            };
            let csv = demand_profile_output(&cfg, cfg.alpha[0], i_th)?;
            println!("wrote {}", write_file(&cfg.out_dir, "demand_profile.csv", &csv)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                HarnessError::Config(_) | HarnessError::Traffic(_) | HarnessError::Threshold(_) => 2,
                HarnessError::FailureBudget { .. } | HarnessError::NoSamples => 3,
                HarnessError::Io { .. } | HarnessError::Pool(_) => 1,
            })
        }
    }
}

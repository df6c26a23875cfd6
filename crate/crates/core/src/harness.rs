//! Monte Carlo estimation of both delivery modes plus threshold analysis
//! and the CSV/report outputs behind the command-line tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::beamforming::{
    schedule_users, solve_broadcast_maxmin, solve_unicast_maxmin, spectral_efficiency,
    BeamformingError, BroadcastProblem, UnicastProblem, DEFAULT_BISECTION_TOL,
    DEFAULT_RANDOMIZATIONS,
};
use crate::channel::{generate_channel, place_users, ChannelConfig, ChannelError, Topology};
use crate::rng::draw_seed;
use crate::threshold::{argmin_discrete, CostParams, ThresholdError, ThresholdReport};
use crate::traffic::{DemandProfile, TrafficError, ZipfModel};

/// Largest tolerated share of failed draws.
pub const FAILURE_BUDGET: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{failed} of {total} draws failed, above the {budget}% budget (first: {first})")]
    FailureBudget {
        failed: usize,
        total: usize,
        budget: f64,
        first: String,
    },
    #[error("no draw succeeded")]
    NoSamples,
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_bs: usize,
    pub n_users: usize,
    pub i_max: usize,
    pub power_dbw: f64,
    pub eta: f64,
    pub alpha: Vec<f64>,
    pub sigma2: f64,
    pub spacing: f64,
    pub n_mc: usize,
    pub n_rand: usize,
    pub seed: u64,
    pub file_size_bits: f64,
    pub bandwidth_hz: f64,
    pub out_dir: PathBuf,
    /// Not a config key; experiments switch it off for deterministic channels.
    pub fading: bool,
    /// Credit all `n_bs` parallel unicast streams instead of one per user.
    pub credit_streams: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_bs: 6,
            n_users: 500,
            i_max: 100,
            power_dbw: 1.0,
            eta: 3.0,
            alpha: vec![1.1],
            sigma2: 1.0,
            spacing: 1.0,
            n_mc: 200,
            n_rand: DEFAULT_RANDOMIZATIONS,
            seed: 1,
            file_size_bits: 1.0,
            bandwidth_hz: 1.0,
            out_dir: PathBuf::from("out"),
            fading: true,
            credit_streams: false,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl SimConfig {
    /// Per-BS power in linear units, `10^(P_dBW / 10)`.
    pub fn power_linear(&self) -> f64 {
        10f64.powf(self.power_dbw / 10.0)
    }

    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            path_loss_exponent: self.eta,
            fading: self.fading,
            noise_power: self.sigma2,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_bs == 0 {
            return Err(invalid("n_bs must be at least 1"));
        }
        if self.n_users < self.n_bs {
            return Err(invalid(format!(
                "n_users ({}) must be at least n_bs ({}) to schedule a full unicast set",
                self.n_users, self.n_bs
            )));
        }
        if self.i_max == 0 {
            return Err(invalid("i_max must be at least 1"));
        }
        if self.n_mc == 0 {
            return Err(invalid("n_mc must be at least 1"));
        }
        if self.n_rand == 0 {
            return Err(invalid("n_rand must be at least 1"));
        }
        if !self.power_dbw.is_finite() {
            return Err(invalid("power_dbw must be finite"));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("sigma2", self.sigma2),
            ("spacing", self.spacing),
            ("file_size_bits", self.file_size_bits),
            ("bandwidth_hz", self.bandwidth_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.alpha.is_empty() {
            return Err(invalid("alpha list is empty"));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(invalid(format!("alpha values must be finite and nonnegative, got {a}")));
        }
        Ok(())
    }

    /// Flat `key = value` echo using the config-file keys.
    pub fn to_key_values(&self) -> String {
        let alphas: Vec<String> = self.alpha.iter().map(|a| a.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "n_bs = {}", self.n_bs);
        let _ = writeln!(out, "n_users = {}", self.n_users);
        let _ = writeln!(out, "i_max = {}", self.i_max);
        let _ = writeln!(out, "power_dbw = {}", self.power_dbw);
        let _ = writeln!(out, "eta = {}", self.eta);
        let _ = writeln!(out, "alpha = {}", alphas.join(","));
        let _ = writeln!(out, "sigma2 = {}", self.sigma2);
        let _ = writeln!(out, "spacing = {}", self.spacing);
        let _ = writeln!(out, "n_mc = {}", self.n_mc);
        let _ = writeln!(out, "n_rand = {}", self.n_rand);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "file_size_bits = {}", self.file_size_bits);
        let _ = writeln!(out, "bandwidth_hz = {}", self.bandwidth_hz);
        let _ = writeln!(out, "out_dir = {}", self.out_dir.display());
        out
    }
}

fn parse_count(key: &str, value: &str, line: usize) -> Result<usize, ConfigError> {
    let v: i64 = value.parse().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("{key}: expected an integer, got {value:?}"),
    })?;
    usize::try_from(v).map_err(|_| invalid(format!("{key} must be nonnegative, got {v} (line {line})")))
}

fn parse_real(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    value.parse().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("{key}: expected a number, got {value:?}"),
    })
}

/// Parses flat `key = value` text; `#` starts a comment. Missing keys keep
/// their defaults and the result is validated.
pub fn parse_config_str(text: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n_bs" => cfg.n_bs = parse_count(key, value, line)?,
            "n_users" => cfg.n_users = parse_count(key, value, line)?,
            "i_max" => cfg.i_max = parse_count(key, value, line)?,
            "n_mc" => cfg.n_mc = parse_count(key, value, line)?,
            "n_rand" => cfg.n_rand = parse_count(key, value, line)?,
            "power_dbw" => cfg.power_dbw = parse_real(key, value, line)?,
            "eta" => cfg.eta = parse_real(key, value, line)?,
            "sigma2" => cfg.sigma2 = parse_real(key, value, line)?,
            "spacing" => cfg.spacing = parse_real(key, value, line)?,
            "file_size_bits" => cfg.file_size_bits = parse_real(key, value, line)?,
            "bandwidth_hz" => cfg.bandwidth_hz = parse_real(key, value, line)?,
            "alpha" => {
                cfg.alpha = value
                    .split(',')
                    .map(|v| parse_real(key, v.trim(), line))
                    .collect::<Result<_, _>>()?
            }
            "seed" => {
                cfg.seed = value.parse().map_err(|_| ConfigError::Syntax {
                    line,
                    message: format!("seed: expected an unsigned 64-bit integer, got {value:?}"),
                })?
            }
            "out_dir" => {
                if value.is_empty() {
                    return Err(ConfigError::Syntax {
                        line,
                        message: "out_dir is empty".into(),
                    });
                }
                cfg.out_dir = PathBuf::from(value)
            }
            other => {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("unknown key {other:?}"),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// One Monte Carlo draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawSample {
    pub index: usize,
    pub seed: u64,
    pub t_bc: f64,
    pub t_uni: f64,
    pub spf_bc: f64,
    pub spf_uni: f64,
    pub scheduled: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrawOutcome {
    Sample(DrawSample),
    Failed { index: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum DrawError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("broadcast: {0}")]
    Broadcast(BeamformingError),
    #[error("unicast: {0}")]
    Unicast(BeamformingError),
}

/// Both modes on a given topology; channel and randomization keyed by `seed`.
pub fn simulate_draw(
    config: &SimConfig,
    topology: &Topology,
    index: usize,
    seed: u64,
) -> Result<DrawSample, DrawError> {
    let ch = generate_channel(topology, &config.channel_config(), seed)?;
    let p = config.power_linear();
    let bc_problem =
        BroadcastProblem::uniform(ch.h.clone(), p, config.sigma2).map_err(DrawError::Broadcast)?;
    let bc = solve_broadcast_maxmin(&bc_problem, config.n_rand, seed).map_err(DrawError::Broadcast)?;

    let scheduled = schedule_users(topology.n_users(), topology.n_bs(), seed);
    let sub = ch.select_users(&scheduled);
    let uc_problem = UnicastProblem::uniform(sub.h, p, config.sigma2).map_err(DrawError::Unicast)?;
    let uc = solve_unicast_maxmin(&uc_problem, DEFAULT_BISECTION_TOL).map_err(DrawError::Unicast)?;

    let streams = if config.credit_streams {
        topology.n_bs() as f64
    } else {
        1.0
    };
    Ok(DrawSample {
        index,
        seed,
        t_bc: bc.t_star,
        t_uni: uc.t_star,
        spf_bc: spectral_efficiency(bc.t_star),
        spf_uni: streams * spectral_efficiency(uc.t_star),
        scheduled,
    })
}

fn run_draw(config: &SimConfig, index: usize) -> DrawOutcome {
    let seed = draw_seed(config.seed, index as u64);
    let result = place_users(config.n_bs, config.spacing, config.n_users, seed)
        .map_err(DrawError::from)
        .and_then(|topo| simulate_draw(config, &topo, index, seed));
    match result {
        Ok(s) => DrawOutcome::Sample(s),
        Err(e) => DrawOutcome::Failed {
            index,
            reason: e.to_string(),
        },
    }
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error of the mean; the error is zero for one sample.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = compensated_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpfEstimate {
    pub outcomes: Vec<DrawOutcome>,
    pub mean_uni: f64,
    pub se_uni: f64,
    pub mean_bc: f64,
    pub se_bc: f64,
    pub failures: usize,
    pub elapsed: Duration,
}

impl SpfEstimate {
    pub fn samples(&self) -> impl Iterator<Item = &DrawSample> {
        self.outcomes.iter().filter_map(|o| match o {
            DrawOutcome::Sample(s) => Some(s),
            DrawOutcome::Failed { .. } => None,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.mean_uni / self.mean_bc
    }

    /// CSV with columns `draw,seed,t_bc,t_uni,spf_bc,spf_uni,status`.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("draw,seed,t_bc,t_uni,spf_bc,spf_uni,status\n");
        for o in &self.outcomes {
            match o {
                DrawOutcome::Sample(s) => {
                    let _ = writeln!(
                        out,
                        "{},{},{:e},{:e},{:e},{:e},ok",
                        s.index, s.seed, s.t_bc, s.t_uni, s.spf_bc, s.spf_uni
                    );
                }
                DrawOutcome::Failed { index, .. } => {
                    let _ = writeln!(out, "{index},,,,,,failed");
                }
            }
        }
        out
    }
}

/// Runs `n_mc` draws, on `threads` workers when given. Draw order never
/// affects the aggregates: outcomes are collected by index and summed
/// sequentially.
pub fn estimate_spectral_efficiencies(
    config: &SimConfig,
    threads: Option<usize>,
) -> Result<SpfEstimate, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let run = || -> Vec<DrawOutcome> {
        (0..config.n_mc)
            .into_par_iter()
            .map(|i| run_draw(config, i))
            .collect()
    };
    let outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    };
    let failed: Vec<&DrawOutcome> = outcomes
        .iter()
        .filter(|o| matches!(o, DrawOutcome::Failed { .. }))
        .collect();
    if failed.len() as f64 > FAILURE_BUDGET * config.n_mc as f64 {
        let first = match failed[0] {
            DrawOutcome::Failed { index, reason } => format!("draw {index}: {reason}"),
            DrawOutcome::Sample(_) => unreachable!(),
        };
        return Err(HarnessError::FailureBudget {
            failed: failed.len(),
            total: config.n_mc,
            budget: FAILURE_BUDGET * 100.0,
            first,
        });
    }
    let failures = failed.len();
    let (uni, bc): (Vec<f64>, Vec<f64>) = outcomes
        .iter()
        .filter_map(|o| match o {
            DrawOutcome::Sample(s) => Some((s.spf_uni, s.spf_bc)),
            DrawOutcome::Failed { .. } => None,
        })
        .unzip();
    if uni.is_empty() {
        return Err(HarnessError::NoSamples);
    }
    let (mean_uni, se_uni) = mean_and_se(&uni);
    let (mean_bc, se_bc) = mean_and_se(&bc);
    Ok(SpfEstimate {
        outcomes,
        mean_uni,
        se_uni,
        mean_bc,
        se_bc,
        failures,
        elapsed: start.elapsed(),
    })
}

fn cost_params(config: &SimConfig, alpha: f64, spf_uni: f64, spf_bc: f64) -> Result<CostParams, HarnessError> {
    Ok(CostParams::new(
        config.n_users as f64,
        config.file_size_bits,
        config.bandwidth_hz,
        spf_uni,
        spf_bc,
        ZipfModel::new(alpha, config.i_max)?,
    )?)
}

/// Threshold analysis for every configured `alpha`.
pub fn threshold_reports(config: &SimConfig, spf_uni: f64, spf_bc: f64) -> Result<Vec<ThresholdReport>, HarnessError> {
    config
        .alpha
        .iter()
        .map(|&a| Ok(argmin_discrete(&cost_params(config, a, spf_uni, spf_bc)?)?))
        .collect()
}

/// CSV with columns `alpha,i,T_total,T_uni_part,T_bc_part,is_argmin`, one
/// block of `i_max + 1` rows per report.
pub fn cost_curves_csv(reports: &[ThresholdReport]) -> String {
    let mut out = String::from("alpha,i,T_total,T_uni_part,T_bc_part,is_argmin\n");
    for r in reports {
        for (k, p) in r.curve.iter().enumerate() {
            let i = k + 1;
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e},{}",
                r.alpha,
                i,
                p.total,
                p.unicast,
                p.broadcast,
                u8::from(i == r.argmin)
            );
        }
    }
    out
}

pub fn sweep_alpha(config: &SimConfig, spf_uni: f64, spf_bc: f64) -> Result<String, HarnessError> {
    Ok(cost_curves_csv(&threshold_reports(config, spf_uni, spf_bc)?))
}

/// CSV with columns `rank,expected_requests,mode`; ranks below `i_th`
/// are broadcast.
pub fn demand_profile_output(config: &SimConfig, alpha: f64, i_th: usize) -> Result<String, HarnessError> {
    let model = ZipfModel::new(alpha, config.i_max)?;
    model.check_threshold(i_th)?;
    let profile = DemandProfile::new(&model, config.n_users as f64, config.file_size_bits);
    let mut out = String::from("rank,expected_requests,mode\n");
    for (k, r) in profile.requests.iter().enumerate() {
        let rank = k + 1;
        let mode = if rank < i_th { "broadcast" } else { "unicast" };
        let _ = writeln!(out, "{rank},{r:e},{mode}");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub alpha: f64,
    pub argmin: usize,
    pub vs_unicast: f64,
    pub vs_broadcast: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementSummary {
    pub per_alpha: Vec<Improvement>,
    pub best_vs_unicast: Improvement,
    pub best_vs_broadcast: Improvement,
}

/// Relative time savings of the optimal threshold against both pure modes.
pub fn improvement_report(reports: &[ThresholdReport]) -> Option<ImprovementSummary> {
    let per_alpha: Vec<Improvement> = reports
        .iter()
        .map(|r| Improvement {
            alpha: r.alpha,
            argmin: r.argmin,
            vs_unicast: r.improvement_vs_unicast,
            vs_broadcast: r.improvement_vs_broadcast,
        })
        .collect();
    let best_vs_unicast = per_alpha
        .iter()
        .max_by(|a, b| a.vs_unicast.total_cmp(&b.vs_unicast))?
        .clone();
    let best_vs_broadcast = per_alpha
        .iter()
        .max_by(|a, b| a.vs_broadcast.total_cmp(&b.vs_broadcast))?
        .clone();
    Some(ImprovementSummary {
        per_alpha,
        best_vs_unicast,
        best_vs_broadcast,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: SimConfig,
    pub estimate: Option<SpfEstimate>,
    pub spf_uni: f64,
    pub spf_bc: f64,
    pub thresholds: Vec<ThresholdReport>,
    pub improvements: Option<ImprovementSummary>,
    pub analysis_time: Duration,
}

impl RunReport {
    /// Flat `key = value` report. Wall-clock entries all start with `wall_`.
    pub fn to_key_values(&self) -> String {
        let mut out = String::from("# configuration\n");
        out.push_str(&self.config.to_key_values());
        let _ = writeln!(out, "credit_streams = {}", self.config.credit_streams);
        let _ = writeln!(
            out,
            "spf_uni_reading = {}",
            if self.config.credit_streams {
                "aggregate over all unicast streams"
            } else {
                "per scheduled user"
            }
        );
        out.push_str("# spectral efficiency\n");
        if let Some(e) = &self.estimate {
            let _ = writeln!(out, "draws = {}", e.outcomes.len());
            let _ = writeln!(out, "failed_draws = {}", e.failures);
            let _ = writeln!(out, "spf_uni_mean = {:e}", e.mean_uni);
            let _ = writeln!(out, "spf_uni_se = {:e}", e.se_uni);
            let _ = writeln!(out, "spf_bc_mean = {:e}", e.mean_bc);
            let _ = writeln!(out, "spf_bc_se = {:e}", e.se_bc);
            let _ = writeln!(out, "spf_ratio = {:e}", e.ratio());
        } else {
            let _ = writeln!(out, "spf_uni = {:e}", self.spf_uni);
            let _ = writeln!(out, "spf_bc = {:e}", self.spf_bc);
            let _ = writeln!(out, "spf_ratio = {:e}", self.spf_uni / self.spf_bc);
        }
        for r in &self.thresholds {
            out.push_str("# threshold\n");
            out.push_str(&r.to_key_values());
        }
        if let Some(s) = &self.improvements {
            out.push_str("# improvement\n");
            let _ = writeln!(out, "max_improvement_vs_unicast = {:e}", s.best_vs_unicast.vs_unicast);
            let _ = writeln!(out, "max_improvement_vs_unicast_alpha = {}", s.best_vs_unicast.alpha);
            let _ = writeln!(out, "max_improvement_vs_broadcast = {:e}", s.best_vs_broadcast.vs_broadcast);
            let _ = writeln!(out, "max_improvement_vs_broadcast_alpha = {}", s.best_vs_broadcast.alpha);
        }
        out.push_str("# timing\n");
        if let Some(e) = &self.estimate {
            let _ = writeln!(out, "wall_monte_carlo_s = {:.3}", e.elapsed.as_secs_f64());
        }
        let _ = writeln!(out, "wall_analysis_s = {:.6}", self.analysis_time.as_secs_f64());
        out
    }
}

/// Threshold and improvement analysis from known spectral efficiencies.
pub fn analyze(config: &SimConfig, spf_uni: f64, spf_bc: f64, estimate: Option<SpfEstimate>) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    let thresholds = threshold_reports(config, spf_uni, spf_bc)?;
    let improvements = improvement_report(&thresholds);
    Ok(RunReport {
        config: config.clone(),
        estimate,
        spf_uni,
        spf_bc,
        thresholds,
        improvements,
        analysis_time: start.elapsed(),
    })
}

/// Full pipeline: estimate both spectral efficiencies, then analyze.
pub fn simulate(config: &SimConfig, threads: Option<usize>) -> Result<RunReport, HarnessError> {
    let estimate = estimate_spectral_efficiencies(config, threads)?;
    let (uni, bc) = (estimate.mean_uni, estimate.mean_bc);
    analyze(config, uni, bc, Some(estimate))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, HarnessError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

/// Writes `run_report.txt`, `cost_curves.csv`, `demand_profile.csv` (first
/// alpha at its optimal threshold) and, with an estimate, `spf_samples.csv`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = vec![
        write_file(dir, "run_report.txt", &report.to_key_values())?,
        write_file(dir, "cost_curves.csv", &cost_curves_csv(&report.thresholds))?,
    ];
    if let Some(first) = report.thresholds.first() {
        let demand = demand_profile_output(&report.config, first.alpha, first.argmin)?;
        written.push(write_file(dir, "demand_profile.csv", &demand)?);
    }
    if let Some(e) = &report.estimate {
        written.push(write_file(dir, "spf_samples.csv", &e.samples_csv())?);
    }
    Ok(written)
}

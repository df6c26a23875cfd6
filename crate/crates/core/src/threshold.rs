//! Total delivery time of a broadcast/unicast split and its optimal threshold.
//!
//! With threshold `i`, ranks `< i` are broadcast once and ranks `>= i` are
//! unicast per request:
//!
//! ```text
//!   T(i) = s/W * ( K * sum_{j>=i} f(j) / (C_max * spf_uni) + (i - 1) / spf_bc )
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::traffic::{volume_broadcast, volume_unicast, TrafficError, ZipfModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("{name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("closed form requires alpha > 1, got {0}")]
    ClosedFormDomain(f64),
    #[error("sign-change rule picked {sign_change} but exhaustive search picked {exhaustive}")]
    RuleMismatch { sign_change: usize, exhaustive: usize },
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    pub users: f64,
    pub file_size: f64,
    pub bandwidth: f64,
    pub spf_uni: f64,
    pub spf_bc: f64,
    pub zipf: ZipfModel,
}

impl CostParams {
    pub fn new(
        users: f64,
        file_size: f64,
        bandwidth: f64,
        spf_uni: f64,
        spf_bc: f64,
        zipf: ZipfModel,
    ) -> Result<Self, ThresholdError> {
        let params = Self {
            users,
            file_size,
            bandwidth,
            spf_uni,
            spf_bc,
            zipf,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ThresholdError> {
        for (name, value) in [
            ("users", self.users),
            ("file size", self.file_size),
            ("bandwidth", self.bandwidth),
            ("spf_uni", self.spf_uni),
            ("spf_bc", self.spf_bc),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ThresholdError::BadParameter { name, value });
            }
        }
        Ok(())
    }

    /// Largest valid threshold, `i_max + 1` (pure broadcast).
    pub fn last_threshold(&self) -> usize {
        self.zipf.i_max() + 1
    }
}

/// Split of `T(i)` into its unicast and broadcast parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBreakdown {
    pub total: f64,
    pub unicast: f64,
    pub broadcast: f64,
}

pub fn time_breakdown(params: &CostParams, i: usize) -> Result<TimeBreakdown, ThresholdError> {
    let uni = volume_unicast(&params.zipf, i, params.file_size, params.users)?
        / (params.bandwidth * params.spf_uni);
    let bc = volume_broadcast(&params.zipf, i, params.file_size)? / (params.bandwidth * params.spf_bc);
    Ok(TimeBreakdown {
        total: uni + bc,
        unicast: uni,
        broadcast: bc,
    })
}

pub fn total_time(params: &CostParams, i: usize) -> Result<f64, ThresholdError> {
    Ok(time_breakdown(params, i)?.total)
}

/// `T(i)` for every `i` in `1..=i_max+1`.
pub fn cost_curve(params: &CostParams) -> Result<Vec<TimeBreakdown>, ThresholdError> {
    params.validate()?;
    (1..=params.last_threshold())
        .map(|i| time_breakdown(params, i))
        .collect()
}

/// `T(i+1) - T(i)` for `i` in `1..=i_max`.
pub fn increment(params: &CostParams, i: usize) -> Result<f64, ThresholdError> {
    let f = params.zipf.popularity(i)?;
    Ok(params.file_size / params.bandwidth
        * (1.0 / params.spf_bc - params.users * f / (params.zipf.c_max() * params.spf_uni)))
}

/// First `i` whose increment is nonnegative, or `i_max + 1` if none is.
pub fn sign_change_threshold(params: &CostParams) -> Result<usize, ThresholdError> {
    params.validate()?;
    for i in 1..=params.zipf.i_max() {
        if increment(params, i)? >= 0.0 {
            return Ok(i);
        }
    }
    Ok(params.last_threshold())
}

/// Index (1-based) of the smallest value, ties going to the smaller index.
fn exhaustive_min(curve: &[TimeBreakdown]) -> usize {
    let mut best = 0;
    for (k, point) in curve.iter().enumerate() {
        if point.total < curve[best].total {
            best = k;
        }
    }
    best + 1
}

pub fn exhaustive_threshold(params: &CostParams) -> Result<usize, ThresholdError> {
    Ok(exhaustive_min(&cost_curve(params)?))
}

/// The integral-approximation threshold
/// `(K spf_bc / (spf_uni C_max + K spf_bc f(i_max)))^(1/alpha)`, unrounded.
pub fn closed_form_threshold(params: &CostParams) -> Result<f64, ThresholdError> {
    params.validate()?;
    let alpha = params.zipf.alpha();
    if !(alpha > 1.0) {
        return Err(ThresholdError::ClosedFormDomain(alpha));
    }
    let f_last = params.zipf.popularity(params.zipf.i_max())?;
    let ratio = params.users * params.spf_bc
        / (params.spf_uni * params.zipf.c_max() + params.users * params.spf_bc * f_last);
    Ok(ratio.powf(1.0 / alpha))
}

/// Nearest integer threshold, clamped to `1..=i_max+1`.
pub fn round_threshold(value: f64, i_max: usize) -> usize {
    if !(value >= 1.0) {
        return 1;
    }
    (value.round() as usize).min(i_max + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    pub rounded: usize,
    pub time_at_rounded: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub alpha: f64,
    pub curve: Vec<TimeBreakdown>,
    pub argmin: usize,
    pub time_at_argmin: f64,
    /// `None` when `alpha <= 1`, where the closed form does not apply.
    pub closed_form: Option<ClosedForm>,
    pub improvement_vs_unicast: f64,
    pub improvement_vs_broadcast: f64,
}

/// Exhaustive minimization of `T`, cross-checked against the sign-change rule.
pub fn argmin_discrete(params: &CostParams) -> Result<ThresholdReport, ThresholdError> {
    let curve = cost_curve(params)?;
    let argmin = exhaustive_min(&curve);
    let rule = sign_change_threshold(params)?;
    if rule != argmin && curve[rule - 1].total != curve[argmin - 1].total {
        return Err(ThresholdError::RuleMismatch {
            sign_change: rule,
            exhaustive: argmin,
        });
    }
    let best = curve[argmin - 1].total;
    let closed_form = match closed_form_threshold(params) {
        Ok(value) => {
            let rounded = round_threshold(value, params.zipf.i_max());
            Some(ClosedForm {
                value,
                rounded,
                time_at_rounded: curve[rounded - 1].total,
            })
        }
        Err(ThresholdError::ClosedFormDomain(_)) => None,
        Err(e) => return Err(e),
    };
    let first = curve[0].total;
    let last = curve[curve.len() - 1].total;
    Ok(ThresholdReport {
        alpha: params.zipf.alpha(),
        argmin,
        time_at_argmin: best,
        closed_form,
        improvement_vs_unicast: 1.0 - best / first,
        improvement_vs_broadcast: 1.0 - best / last,
        curve,
    })
}

impl ThresholdReport {
    /// CSV with columns `i,T_total,T_uni_part,T_bc_part`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("i,T_total,T_uni_part,T_bc_part\n");
        for (k, p) in self.curve.iter().enumerate() {
            let _ = writeln!(out, "{},{:e},{:e},{:e}", k + 1, p.total, p.unicast, p.broadcast);
        }
        out
    }

    /// Flat `key = value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "argmin = {}", self.argmin);
        let _ = writeln!(out, "time_at_argmin = {:e}", self.time_at_argmin);
        let _ = writeln!(out, "time_pure_unicast = {:e}", self.curve[0].total);
        let _ = writeln!(out, "time_pure_broadcast = {:e}", self.curve[self.curve.len() - 1].total);
        match &self.closed_form {
            Some(cf) => {
                let _ = writeln!(out, "closed_form = {:e}", cf.value);
                let _ = writeln!(out, "closed_form_rounded = {}", cf.rounded);
                let _ = writeln!(out, "time_at_closed_form = {:e}", cf.time_at_rounded);
                let _ = writeln!(
                    out,
                    "closed_form_gap = {:e}",
                    cf.time_at_rounded / self.time_at_argmin - 1.0
                );
            }
            None => {
                let _ = writeln!(out, "closed_form = undefined");
            }
        }
        let _ = writeln!(out, "improvement_vs_unicast = {:e}", self.improvement_vs_unicast);
        let _ = writeln!(out, "improvement_vs_broadcast = {:e}", self.improvement_vs_broadcast);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper(alpha: f64) -> CostParams {
        CostParams::new(500.0, 1.0, 1.0, 3.0, 1.0, ZipfModel::new(alpha, 100).unwrap()).unwrap()
    }

    #[test]
    fn endpoints() {
        let p = paper(1.1);
        assert!((total_time(&p, 1).unwrap() - 500.0 / 3.0).abs() < 1e-9);
        assert!((total_time(&p, 101).unwrap() - 100.0).abs() < 1e-12);
        assert!(total_time(&p, 0).is_err());
        assert!(total_time(&p, 102).is_err());
    }

    #[test]
    fn paper_argmin() {
        let r = argmin_discrete(&paper(1.1)).unwrap();
        assert_eq!(r.argmin, 28);
        assert!((r.time_at_argmin - 60.9946).abs() < 1e-3);
        let cf = r.closed_form.unwrap();
        assert!((cf.value - 22.868).abs() < 1e-2);
        assert_eq!(cf.rounded, 23);
    }

    #[test]
    fn single_user_unicasts_everything() {
        let p = CostParams::new(1.0, 1.0, 1.0, 3.0, 1.0, ZipfModel::new(1.1, 100).unwrap()).unwrap();
        assert!(increment(&p, 1).unwrap() >= 0.0);
        let r = argmin_discrete(&p).unwrap();
        assert_eq!(r.argmin, 1);
        assert_eq!(r.improvement_vs_unicast, 0.0);
    }

    #[test]
    fn huge_population_broadcasts_everything() {
        let p = CostParams::new(1e9, 1.0, 1.0, 3.0, 1.0, ZipfModel::new(1.1, 100).unwrap()).unwrap();
        assert_eq!(argmin_discrete(&p).unwrap().argmin, 101);
    }

    #[test]
    fn closed_form_domain() {
        assert_eq!(
            closed_form_threshold(&paper(1.0)),
            Err(ThresholdError::ClosedFormDomain(1.0))
        );
        assert!(argmin_discrete(&paper(0.8)).unwrap().closed_form.is_none());
        assert_eq!(round_threshold(0.2, 100), 1);
        assert_eq!(round_threshold(400.0, 100), 101);
    }

    #[test]
    fn closed_form_tiny_population() {
        let p = CostParams::new(1e-6, 1.0, 1.0, 3.0, 1.0, ZipfModel::new(1.5, 100).unwrap()).unwrap();
        let v = closed_form_threshold(&p).unwrap();
        assert!(v > 0.0 && v < 1e-2);
        assert_eq!(round_threshold(v, 100), 1);
    }

    #[test]
    fn rejects_bad_params() {
        let z = ZipfModel::new(1.1, 10).unwrap();
        assert!(CostParams::new(0.0, 1.0, 1.0, 1.0, 1.0, z.clone()).is_err());
        assert!(CostParams::new(1.0, 1.0, 1.0, f64::INFINITY, 1.0, z).is_err());
    }

    #[test]
    fn report_formats() {
        let r = argmin_discrete(&paper(1.1)).unwrap();
        assert_eq!(r.curve_csv().lines().count(), 102);
        assert!(r.to_key_values().contains("argmin = 28\n"));
    }
}

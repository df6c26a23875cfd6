//! Zipf content popularity and per-mode data volumes.
//!
//! Files are ranked `1..=i_max` from most to least popular, with raw
//! popularity `f(i) = i^(-alpha)` and request probability `f(i) / C_max`.
//! A threshold rank `i_th` broadcasts ranks `< i_th` and unicasts the rest,
//! so `i_th = 1` is pure unicast and `i_th = i_max + 1` is pure broadcast.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("shaping parameter must be finite and nonnegative, got {0}")]
    BadAlpha(f64),
    #[error("catalog must contain at least one file")]
    EmptyCatalog,
    #[error("rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("threshold {threshold} outside 1..={max}")]
    ThresholdOutOfRange { threshold: usize, max: usize },
}

/// Raw Zipf weight `i^(-alpha)`.
fn zipf(alpha: f64, i: usize) -> f64 {
    (i as f64).powf(-alpha)
}

/// `sum_{i=1}^{i_max} i^(-alpha)`, summed term by term.
pub fn normalization(alpha: f64, i_max: usize) -> f64 {
    (1..=i_max).map(|i| zipf(alpha, i)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfModel {
    alpha: f64,
    i_max: usize,
    c_max: f64,
}

impl ZipfModel {
    pub fn new(alpha: f64, i_max: usize) -> Result<Self, TrafficError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(TrafficError::BadAlpha(alpha));
        }
        if i_max == 0 {
            return Err(TrafficError::EmptyCatalog);
        }
        Ok(Self {
            alpha,
            i_max,
            c_max: normalization(alpha, i_max),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    fn check_rank(&self, rank: usize) -> Result<(), TrafficError> {
        if rank == 0 || rank > self.i_max {
            return Err(TrafficError::RankOutOfRange {
                rank,
                max: self.i_max,
            });
        }
        Ok(())
    }

    pub(crate) fn check_threshold(&self, threshold: usize) -> Result<(), TrafficError> {
        if threshold == 0 || threshold > self.i_max + 1 {
            return Err(TrafficError::ThresholdOutOfRange {
                threshold,
                max: self.i_max + 1,
            });
        }
        Ok(())
    }

    pub fn popularity(&self, rank: usize) -> Result<f64, TrafficError> {
        self.check_rank(rank)?;
        Ok(zipf(self.alpha, rank))
    }

    /// Request probability `f(i) / C_max`.
    pub fn probability(&self, rank: usize) -> Result<f64, TrafficError> {
        Ok(self.popularity(rank)? / self.c_max)
    }

    /// `sum_{i=from}^{i_max} f(i)`; zero for `from = i_max + 1`.
    pub fn tail_sum(&self, from: usize) -> Result<f64, TrafficError> {
        self.check_threshold(from)?;
        Ok((from..=self.i_max).map(|i| zipf(self.alpha, i)).sum())
    }

    /// `sum_{i=1}^{below-1} f(i)`.
    pub fn head_sum(&self, below: usize) -> Result<f64, TrafficError> {
        self.check_threshold(below)?;
        Ok((1..below).map(|i| zipf(self.alpha, i)).sum())
    }
}

/// Transmitted broadcast volume `(i_th - 1) s`: each broadcast file is sent once.
pub fn volume_broadcast(
    model: &ZipfModel,
    threshold: usize,
    file_size: f64,
) -> Result<f64, TrafficError> {
    model.check_threshold(threshold)?;
    Ok((threshold - 1) as f64 * file_size)
}

/// Volume cached from the broadcast across all users, `s K sum_{i<i_th} p(i)`.
pub fn volume_cached(
    model: &ZipfModel,
    threshold: usize,
    file_size: f64,
    users: f64,
) -> Result<f64, TrafficError> {
    Ok(file_size * users * model.head_sum(threshold)? / model.c_max)
}

/// Unicast volume `s K sum_{i >= i_th} p(i)`: every request delivered individually.
pub fn volume_unicast(
    model: &ZipfModel,
    threshold: usize,
    file_size: f64,
    users: f64,
) -> Result<f64, TrafficError> {
    Ok(file_size * users * model.tail_sum(threshold)? / model.c_max)
}

/// Expected per-file request counts for a subscriber base.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    pub users: f64,
    pub file_size: f64,
    pub popularity: Vec<f64>,
    pub probability: Vec<f64>,
    pub requests: Vec<f64>,
}

impl DemandProfile {
    pub fn new(model: &ZipfModel, users: f64, file_size: f64) -> Self {
        let popularity: Vec<f64> = (1..=model.i_max).map(|i| zipf(model.alpha, i)).collect();
        let probability: Vec<f64> = popularity.iter().map(|f| f / model.c_max).collect();
        let requests = probability.iter().map(|p| users * p).collect();
        Self {
            users,
            file_size,
            popularity,
            probability,
            requests,
        }
    }

    pub fn total_requests(&self) -> f64 {
        self.requests.iter().sum()
    }

    /// CSV with columns `rank,popularity,normalized_popularity,expected_requests`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,popularity,normalized_popularity,expected_requests\n");
        for (i, ((f, p), r)) in self
            .popularity
            .iter()
            .zip(&self.probability)
            .zip(&self.requests)
            .enumerate()
        {
            let _ = writeln!(out, "{},{},{},{}", i + 1, f, p, r);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn popularity_values() {
        let m = ZipfModel::new(1.1, 100).unwrap();
        assert_eq!(m.popularity(1).unwrap(), 1.0);
        assert!((m.popularity(10).unwrap() - 0.079433).abs() < 1e-6);
        let m1 = ZipfModel::new(1.0, 100).unwrap();
        assert_eq!(m1.popularity(2).unwrap(), 0.5);
        assert!(matches!(m.popularity(0), Err(TrafficError::RankOutOfRange { .. })));
        assert!(matches!(m.popularity(101), Err(TrafficError::RankOutOfRange { .. })));
    }

    #[test]
    fn normalization_values() {
        assert_eq!(normalization(0.0, 100), 100.0);
        assert!((normalization(50.0, 100) - 1.0).abs() < 1e-12);
        assert!((normalization(1.0, 4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_models() {
        assert_eq!(ZipfModel::new(1.0, 0), Err(TrafficError::EmptyCatalog));
        assert!(matches!(ZipfModel::new(-0.1, 5), Err(TrafficError::BadAlpha(_))));
        assert!(matches!(ZipfModel::new(f64::NAN, 5), Err(TrafficError::BadAlpha(_))));
    }

    #[test]
    fn broadcast_volume() {
        let m = ZipfModel::new(1.1, 100).unwrap();
        assert_eq!(volume_broadcast(&m, 1, 1e6).unwrap(), 0.0);
        assert_eq!(volume_broadcast(&m, 101, 1.0).unwrap(), 100.0);
        assert_eq!(volume_broadcast(&m, 29, 1.0).unwrap(), 28.0);
        assert!(volume_broadcast(&m, 0, 1.0).is_err());
        assert!(volume_broadcast(&m, 102, 1.0).is_err());
    }

    #[test]
    fn unicast_volume() {
        let m = ZipfModel::new(1.1, 100).unwrap();
        assert_eq!(volume_unicast(&m, 101, 1.0, 500.0).unwrap(), 0.0);
        assert!((volume_unicast(&m, 1, 2.0, 500.0).unwrap() - 1000.0).abs() < 1e-9);
        let m2 = ZipfModel::new(1.0, 2).unwrap();
        assert!((volume_unicast(&m2, 2, 1.0, 12.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(volume_unicast(&m, 102, 1.0, 1.0).is_err());
    }

    #[test]
    fn demand_profile_csv() {
        let m = ZipfModel::new(1.1, 10).unwrap();
        let d = DemandProfile::new(&m, 500.0, 1.0);
        assert!((d.total_requests() - 500.0).abs() < 1e-9 * 500.0);
        let csv = d.to_csv();
        assert_eq!(csv.lines().count(), 11);
        let row: Vec<f64> = csv.lines().nth(3).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], 3.0);
        assert_eq!(row[3], d.requests[2]);
    }

    proptest! {
        #[test]
        fn volumes_conserve_requests(alpha in 0.0f64..3.0, i_max in 1usize..200, th_frac in 0.0f64..1.0) {
            let m = ZipfModel::new(alpha, i_max).unwrap();
            let th = 1 + ((i_max as f64) * th_frac).round() as usize;
            let total = volume_unicast(&m, th, 3.0, 70.0).unwrap() + volume_cached(&m, th, 3.0, 70.0).unwrap();
            prop_assert!((total - 210.0).abs() < 1e-9 * 210.0);
            let probs: f64 = (1..=i_max).map(|i| m.probability(i).unwrap()).sum();
            prop_assert!((probs - 1.0).abs() < 1e-12);
            prop_assert!((m.c_max() - normalization(alpha, i_max)).abs() <= 1e-12 * m.c_max());
        }

        #[test]
        fn volumes_are_monotone(alpha in 0.0f64..3.0, i_max in 1usize..120) {
            let m = ZipfModel::new(alpha, i_max).unwrap();
            for th in 1..=i_max {
                prop_assert!(volume_unicast(&m, th + 1, 1.0, 10.0).unwrap() <= volume_unicast(&m, th, 1.0, 10.0).unwrap());
                prop_assert!(volume_broadcast(&m, th + 1, 1.0).unwrap() > volume_broadcast(&m, th, 1.0).unwrap());
                prop_assert!(m.popularity(th).unwrap() >= m.popularity((th + 1).min(i_max)).unwrap());
            }
        }
    }
}

//! Linear (Wyner) cell layout and Rayleigh/path-loss channel generation.
//!
//! Base station `n` sits at `n * D` on a line; users are dropped uniformly
//! on `[-D/2, (N-1) D + D/2]`. The coefficient between user `i` and BS `j`
//! is `h_ij = g_ij / (1 + d_ij^(eta/2))` with `g_ij ~ CN(0, 1)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::rng::{complex_gaussian, stream_rng, Stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("base station count must be at least 1")]
    NoBaseStations,
    #[error("user count must be at least 1")]
    NoUsers,
    #[error("inter-BS spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("user coordinate {0} lies outside the cluster span")]
    UserOutOfRange(f64),
    #[error("path-loss exponent must be nonnegative, got {0}")]
    BadExponent(f64),
    #[error("noise power must be positive, got {0}")]
    BadNoise(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    spacing: f64,
    bs_positions: Vec<f64>,
    user_positions: Vec<f64>,
}

impl Topology {
    /// Builds a topology from explicit user coordinates.
    pub fn with_users(n_bs: usize, spacing: f64, users: Vec<f64>) -> Result<Self, ChannelError> {
        if n_bs == 0 {
            return Err(ChannelError::NoBaseStations);
        }
        if users.is_empty() {
            return Err(ChannelError::NoUsers);
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(ChannelError::BadSpacing(spacing));
        }
        let (lo, hi) = span(n_bs, spacing);
        if let Some(&bad) = users.iter().find(|&&u| !(lo..=hi).contains(&u)) {
            return Err(ChannelError::UserOutOfRange(bad));
        }
        Ok(Self {
            spacing,
            bs_positions: (0..n_bs).map(|n| n as f64 * spacing).collect(),
            user_positions: users,
        })
    }

    pub fn n_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn n_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn bs_positions(&self) -> &[f64] {
        &self.bs_positions
    }

    pub fn user_positions(&self) -> &[f64] {
        &self.user_positions
    }
}

/// Placement interval: the cluster extended by half a cell on each side.
pub fn span(n_bs: usize, spacing: f64) -> (f64, f64) {
    (
        -spacing / 2.0,
        (n_bs as f64 - 1.0) * spacing + spacing / 2.0,
    )
}

/// Drops `n_users` users uniformly over the cluster span.
pub fn place_users(
    n_bs: usize,
    spacing: f64,
    n_users: usize,
    seed: u64,
) -> Result<Topology, ChannelError> {
    if n_bs == 0 {
        return Err(ChannelError::NoBaseStations);
    }
    if n_users == 0 {
        return Err(ChannelError::NoUsers);
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(ChannelError::BadSpacing(spacing));
    }
    let (lo, hi) = span(n_bs, spacing);
    let mut rng = stream_rng(seed, Stream::Placement);
    let users = (0..n_users)
        .map(|_| (lo + (hi - lo) * rng.random::<f64>()).min(hi))
        .collect();
    Topology::with_users(n_bs, spacing, users)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub path_loss_exponent: f64,
    pub fading: bool,
    pub noise_power: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            path_loss_exponent: 3.0,
            fading: true,
            noise_power: 1.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.path_loss_exponent >= 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(ChannelError::BadExponent(self.path_loss_exponent));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(ChannelError::BadNoise(self.noise_power));
        }
        Ok(())
    }
}

/// `K x N` user-to-BS channel with the draws it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub h: DMatrix<Complex64>,
    pub fading: DMatrix<Complex64>,
    pub distances: DMatrix<f64>,
}

impl ChannelMatrix {
    pub fn n_users(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_bs(&self) -> usize {
        self.h.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<Complex64> {
        self.h.row(i).iter().copied().collect()
    }

    /// Sub-channel made of the given user rows, in order.
    pub fn select_users(&self, users: &[usize]) -> ChannelMatrix {
        ChannelMatrix {
            h: self.h.select_rows(users),
            fading: self.fading.select_rows(users),
            distances: self.distances.select_rows(users),
        }
    }
}

/// Path-loss attenuation `1 / (1 + d^(eta/2))`, exactly 1 at zero distance.
pub fn attenuation(distance: f64, eta: f64) -> f64 {
    if distance == 0.0 {
        return 1.0;
    }
    1.0 / (1.0 + distance.powf(eta / 2.0))
}

pub fn generate_channel(
    topology: &Topology,
    config: &ChannelConfig,
    seed: u64,
) -> Result<ChannelMatrix, ChannelError> {
    config.validate()?;
    let (k, n) = (topology.n_users(), topology.n_bs());
    let mut rng = stream_rng(seed, Stream::Fading);
    let distances = DMatrix::from_fn(k, n, |i, j| {
        (topology.user_positions[i] - topology.bs_positions[j]).abs()
    });
    // row-major draw order so the i-th user's coefficients are contiguous
    let mut draws = Vec::with_capacity(k * n);
    for _ in 0..k * n {
        draws.push(if config.fading {
            complex_gaussian(&mut rng)
        } else {
            Complex64::new(1.0, 0.0)
        });
    }
    let fading = DMatrix::from_row_slice(k, n, &draws);
    let h = DMatrix::from_fn(k, n, |i, j| {
        fading[(i, j)] * attenuation(distances[(i, j)], config.path_loss_exponent)
    });
    Ok(ChannelMatrix {
        h,
        fading,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_cell_user_in_interval() {
        for seed in 0..20 {
            let t = place_users(1, 1.0, 1, seed).unwrap();
            let u = t.user_positions()[0];
            assert!((-0.5..=0.5).contains(&u));
        }
    }

    #[test]
    fn placement_is_deterministic() {
        assert_eq!(place_users(6, 1.0, 50, 9).unwrap(), place_users(6, 1.0, 50, 9).unwrap());
        assert_ne!(place_users(6, 1.0, 50, 9).unwrap(), place_users(6, 1.0, 50, 10).unwrap());
    }

    #[test]
    fn placement_mean_is_midpoint() {
        let t = place_users(6, 1.0, 500, 42).unwrap();
        let mean = t.user_positions().iter().sum::<f64>() / 500.0;
        // width 6, uniform sd = 6/sqrt(12), standard error of the mean over 500
        let se = 6.0 / 12f64.sqrt() / 500f64.sqrt();
        assert!((mean - 2.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn rejects_empty_layouts() {
        assert_eq!(place_users(0, 1.0, 3, 1), Err(ChannelError::NoBaseStations));
        assert_eq!(place_users(3, 1.0, 0, 1), Err(ChannelError::NoUsers));
        assert!(matches!(place_users(3, 0.0, 3, 1), Err(ChannelError::BadSpacing(_))));
        assert!(matches!(
            Topology::with_users(2, 1.0, vec![3.0]),
            Err(ChannelError::UserOutOfRange(_))
        ));
    }

    #[test]
    fn no_fading_unit_distance() {
        let t = Topology::with_users(2, 1.0, vec![0.0]).unwrap();
        let cfg = ChannelConfig {
            fading: false,
            ..Default::default()
        };
        let ch = generate_channel(&t, &cfg, 0).unwrap();
        assert_eq!(ch.h[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(ch.h[(0, 1)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn fading_variance_concentrates() {
        let users: Vec<f64> = (0..10_000).map(|i| (i % 5) as f64 * 0.1).collect();
        let t = Topology::with_users(1, 1.0, users).unwrap();
        let ch = generate_channel(&t, &ChannelConfig::default(), 77).unwrap();
        let g: Vec<Complex64> = ch.fading.iter().copied().collect();
        let n = g.len() as f64;
        let mean = g.iter().sum::<Complex64>() / n;
        let var = g.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        assert!((0.94..=1.06).contains(&var), "variance {var}");
    }

    #[test]
    fn zero_exponent_halves_every_nonzero_distance() {
        let t = Topology::with_users(3, 1.0, vec![0.0, 0.7, 2.4]).unwrap();
        let cfg = ChannelConfig {
            path_loss_exponent: 0.0,
            fading: true,
            noise_power: 1.0,
        };
        let ch = generate_channel(&t, &cfg, 5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if ch.distances[(i, j)] == 0.0 {
                    ch.fading[(i, j)]
                } else {
                    ch.fading[(i, j)] / 2.0
                };
                assert_eq!(ch.h[(i, j)], expected);
            }
        }
    }

    proptest! {
        #[test]
        fn magnitude_never_exceeds_fading(seed in any::<u64>(), eta in 0.0f64..6.0) {
            let t = place_users(4, 1.0, 8, seed).unwrap();
            let cfg = ChannelConfig { path_loss_exponent: eta, ..Default::default() };
            let ch = generate_channel(&t, &cfg, seed).unwrap();
            for (h, g) in ch.h.iter().zip(ch.fading.iter()) {
                prop_assert!(h.norm() <= g.norm());
            }
            prop_assert_eq!(&ch, &generate_channel(&t, &cfg, seed).unwrap());
        }

        #[test]
        fn attenuation_strictly_decreasing(d1 in 0.0f64..10.0, delta in 1e-3f64..5.0, eta in 0.1f64..6.0) {
            prop_assert!(attenuation(d1 + delta, eta) < attenuation(d1, eta));
        }
    }
}

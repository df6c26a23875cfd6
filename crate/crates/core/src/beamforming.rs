//! Max-min fair CoMP beamforming under per-antenna power limits.
//!
//! Both problems are attacked through their semidefinite relaxations with
//! `X = w w^H` lifted to a PSD matrix. The broadcast (single multicast
//! stream) relaxation is one conic solve followed by Gaussian
//! randomization; the unicast relaxation is bisection on the balanced
//! SINR level over conic feasibility problems.
//!
//! Internally powers are normalized so that each per-antenna limit reads
//! `Y_nn <= 1` with `X = D^(1/2) Y D^(1/2)`, `D = diag(P)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::conic::{self, ConicError, ConicProgram, ConicSolution, HermitianMatrix, Sense, SolveStatus};
use crate::rng::{complex_gaussian, stream_rng, Stream};

/// Solver accuracy requested for every relaxation.
pub const CONIC_TOLERANCE: f64 = 1e-10;
/// Residuals still accepted when the solver stalls short of the request.
pub const CONIC_ACCEPT: f64 = 1e-7;
/// Relative duality gap accepted alongside `CONIC_ACCEPT`.
pub const CONIC_GAP_ACCEPT: f64 = 1e-6;
/// Residual ceiling and safety factor for `dual_excludes`.
const DECISIVE_RESIDUAL: f64 = 1e-5;
const DECISIVE_FACTOR: f64 = 100.0;
/// A margin at or above `-MARGIN_TOLERANCE` counts as feasible.
pub const MARGIN_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_RANDOMIZATIONS: usize = 300;
const REFINEMENT_ITERATIONS: usize = 30;
const REFINEMENT_GAIN: f64 = 1e-5;
pub const DEFAULT_BISECTION_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamformingError {
    #[error("unicast channel must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("channel has no users or no antennas")]
    EmptyChannel,
    #[error("{name} has {found} entries, expected {expected}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{name}[{index}] must be positive and finite, got {value}")]
    NotPositive {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("channel contains non-finite entries")]
    NonFinite,
    #[error("randomization count must be at least 1")]
    NoRandomizations,
    #[error("bisection tolerance {0} outside (0, 1e-2]")]
    BadTolerance(f64),
    #[error("relaxation solve ended with status {0:?}")]
    Solver(SolveStatus),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Unicast,
    Broadcast,
}

/// Transmit weights; in unicast mode `weights[k]` serves user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub mode: Mode,
    pub weights: Vec<DVector<Complex64>>,
}

impl PrecoderSet {
    pub fn broadcast(w: DVector<Complex64>) -> Self {
        Self {
            mode: Mode::Broadcast,
            weights: vec![w],
        }
    }

    pub fn unicast(weights: Vec<DVector<Complex64>>) -> Self {
        Self {
            mode: Mode::Unicast,
            weights,
        }
    }

    fn zeros(mode: Mode, count: usize, n: usize) -> Self {
        Self {
            mode,
            weights: vec![DVector::zeros(n); count],
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.weights.first().map_or(0, |w| w.len())
    }

    fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w *= Complex64::new(factor, 0.0);
        }
    }
}

/// `[sum_k w_k w_k^H]_nn` for every antenna `n`.
pub fn per_antenna_power(precoders: &PrecoderSet) -> Vec<f64> {
    let mut p = vec![0.0; precoders.n_antennas()];
    for w in &precoders.weights {
        for (pn, wn) in p.iter_mut().zip(w.iter()) {
            *pn += wn.norm_sqr();
        }
    }
    p
}

fn gain(w: &DVector<Complex64>, h: &[Complex64]) -> f64 {
    w.iter()
        .zip(h)
        .map(|(w, h)| w.conj() * h)
        .sum::<Complex64>()
        .norm_sqr()
}

/// SINR of `user` with channel row `h`: in unicast mode the user decodes
/// `weights[user]` against all other streams, in broadcast mode the single
/// stream sees only noise.
pub fn sinr(precoders: &PrecoderSet, h: &[Complex64], noise: f64, user: usize) -> f64 {
    match precoders.mode {
        Mode::Broadcast => gain(&precoders.weights[0], h) / noise,
        Mode::Unicast => {
            let signal = gain(&precoders.weights[user], h);
            let interference: f64 = precoders
                .weights
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != user)
                .map(|(_, w)| gain(w, h))
                .sum();
            signal / (interference + noise)
        }
    }
}

/// Shannon map `log2(1 + t)`.
pub fn spectral_efficiency(t: f64) -> f64 {
    (1.0 + t).log2()
}

fn check_positive(name: &'static str, values: &[f64], expected: usize) -> Result<(), BeamformingError> {
    if values.len() != expected {
        return Err(BeamformingError::LengthMismatch {
            name,
            expected,
            found: values.len(),
        });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
    {
        return Err(BeamformingError::NotPositive { name, index, value });
    }
    Ok(())
}

fn check_common(
    channel: &DMatrix<Complex64>,
    weights: &[f64],
    power: &[f64],
    noise: &[f64],
) -> Result<(), BeamformingError> {
    let (k, n) = channel.shape();
    if k == 0 || n == 0 {
        return Err(BeamformingError::EmptyChannel);
    }
    if channel.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(BeamformingError::NonFinite);
    }
    check_positive("weights", weights, k)?;
    check_positive("power", power, n)?;
    check_positive("noise", noise, k)
}

/// One stream per scheduled user; user `i` is served by precoder `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnicastProblem {
    pub channel: DMatrix<Complex64>,
    pub weights: Vec<f64>,
    pub power: Vec<f64>,
    pub noise: Vec<f64>,
}

impl UnicastProblem {
    pub fn new(
        channel: DMatrix<Complex64>,
        weights: Vec<f64>,
        power: Vec<f64>,
        noise: Vec<f64>,
    ) -> Result<Self, BeamformingError> {
        let (rows, cols) = channel.shape();
        if rows != cols {
            return Err(BeamformingError::NotSquare { rows, cols });
        }
        check_common(&channel, &weights, &power, &noise)?;
        Ok(Self {
            channel,
            weights,
            power,
            noise,
        })
    }

    /// Unit weights, equal per-antenna power and equal noise.
    pub fn uniform(channel: DMatrix<Complex64>, power: f64, noise: f64) -> Result<Self, BeamformingError> {
        let (k, n) = channel.shape();
        Self::new(channel, vec![1.0; k], vec![power; n], vec![noise; k])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastProblem {
    pub channel: DMatrix<Complex64>,
    pub weights: Vec<f64>,
    pub power: Vec<f64>,
    pub noise: Vec<f64>,
}

impl BroadcastProblem {
    pub fn new(
        channel: DMatrix<Complex64>,
        weights: Vec<f64>,
        power: Vec<f64>,
        noise: Vec<f64>,
    ) -> Result<Self, BeamformingError> {
        check_common(&channel, &weights, &power, &noise)?;
        Ok(Self {
            channel,
            weights,
            power,
            noise,
        })
    }

    pub fn uniform(channel: DMatrix<Complex64>, power: f64, noise: f64) -> Result<Self, BeamformingError> {
        let (k, n) = channel.shape();
        Self::new(channel, vec![1.0; k], vec![power; n], vec![noise; k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamformingStatus {
    Solved,
    /// Some user has an all-zero channel row, so the balanced level is 0.
    ZeroChannel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingResult {
    pub t_star: f64,
    pub precoders: PrecoderSet,
    pub relaxation_bound: f64,
    pub sinrs: Vec<f64>,
    pub status: BeamformingStatus,
    /// Gaussian candidates drawn (broadcast only).
    pub randomizations: usize,
    /// Largest `lambda_2 / lambda_1` over the relaxation's matrix variables.
    pub rank_one_residual: f64,
    /// Conic programs solved.
    pub conic_solves: usize,
}

fn row(channel: &DMatrix<Complex64>, i: usize) -> Vec<Complex64> {
    channel.row(i).iter().copied().collect()
}

fn has_zero_row(channel: &DMatrix<Complex64>) -> bool {
    channel.row_iter().any(|r| r.iter().all(|z| z.norm_sqr() == 0.0))
}

/// `D^(1/2) h h^H D^(1/2) / (gamma sigma^2)`: the normalized gain matrix
/// of one user in the `Y` coordinates.
fn normalized_gain(h: &[Complex64], power: &[f64], scale: f64) -> HermitianMatrix {
    let v: Vec<Complex64> = h
        .iter()
        .zip(power)
        .map(|(h, p)| h * (p / scale).sqrt())
        .collect();
    HermitianMatrix::outer(&v)
}

/// `X = D^(1/2) Y D^(1/2)`.
fn denormalize(y: &HermitianMatrix, power: &[f64]) -> HermitianMatrix {
    let n = y.dim();
    let m = DMatrix::from_fn(n, n, |j, k| y.get(j, k) * (power[j] * power[k]).sqrt());
    HermitianMatrix::new(m).expect("congruence preserves Hermitian structure")
}

fn rank_one_ratio(x: &HermitianMatrix) -> f64 {
    let ev = x.eigenvalues();
    if ev[0] <= 0.0 {
        return 0.0;
    }
    ev.get(1).map_or(0.0, |l2| l2.max(0.0) / ev[0])
}

fn principal_precoder(x: &HermitianMatrix) -> DVector<Complex64> {
    let (lambda, v) = x.principal_eigenpair();
    v * Complex64::new(lambda.max(0.0).sqrt(), 0.0)
}

/// Every antenna at full power, keeping the phases of `w`.
fn phase_projection(w: &DVector<Complex64>, power: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(
        w.len(),
        w.iter().zip(power).map(|(z, p)| {
            if z.norm() > 0.0 {
                z / z.norm() * p.sqrt()
            } else {
                Complex64::new(p.sqrt(), 0.0)
            }
        }),
    )
}

/// Largest uniform factor keeping every antenna within its limit.
fn boundary_scale(precoders: &PrecoderSet, power: &[f64]) -> Option<f64> {
    per_antenna_power(precoders)
        .iter()
        .zip(power)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, limit)| (limit / p).sqrt())
        .min_by(f64::total_cmp)
}

fn balanced_level(precoders: &PrecoderSet, channel: &DMatrix<Complex64>, weights: &[f64], noise: &[f64]) -> (f64, Vec<f64>) {
    let sinrs: Vec<f64> = (0..channel.nrows())
        .map(|i| sinr(precoders, &row(channel, i), noise[i], i))
        .collect();
    let t = sinrs
        .iter()
        .zip(weights)
        .map(|(s, g)| s / g)
        .fold(f64::INFINITY, f64::min);
    (t, sinrs)
}

fn zero_result(mode: Mode, count: usize, k: usize, n: usize) -> BeamformingResult {
    BeamformingResult {
        t_star: 0.0,
        precoders: PrecoderSet::zeros(mode, count, n),
        relaxation_bound: 0.0,
        sinrs: vec![0.0; k],
        status: BeamformingStatus::ZeroChannel,
        randomizations: 0,
        rank_one_residual: 0.0,
        conic_solves: 0,
    }
}

/// Relaxation `max t  s.t.  <G_i, Y> >= t,  Y_nn <= 1,  Y >= 0`, with the
/// gains divided by `scale` so the optimum is of order one.
fn broadcast_relaxation(problem: &BroadcastProblem, scale: f64) -> Result<ConicProgram, ConicError> {
    let n = problem.channel.ncols();
    let mut prog = ConicProgram::new(vec![n])?.with_scalar();
    prog.set_scalar_objective(1.0)?;
    for i in 0..problem.channel.nrows() {
        let g = normalized_gain(
            &row(&problem.channel, i),
            &problem.power,
            problem.weights[i] * problem.noise[i] * scale,
        );
        prog.add_constraint(vec![(0, g)], -1.0, Sense::Ge, 0.0)?;
    }
    for k in 0..n {
        prog.add_constraint(vec![(0, HermitianMatrix::unit_diagonal(n, k))], 0.0, Sense::Le, 1.0)?;
    }
    Ok(prog)
}

/// Semidefinite relaxation plus `n_rand` Gaussian candidates drawn from the
/// relaxed covariance; the principal eigenvector is always a candidate.
pub fn solve_broadcast_maxmin(
    problem: &BroadcastProblem,
    n_rand: usize,
    seed: u64,
) -> Result<BeamformingResult, BeamformingError> {
    if n_rand == 0 {
        return Err(BeamformingError::NoRandomizations);
    }
    let (k, n) = problem.channel.shape();
    if has_zero_row(&problem.channel) {
        return Ok(zero_result(Mode::Broadcast, 1, k, n));
    }
    let scale = single_user_bound(&problem.channel, &problem.power, &problem.weights, &problem.noise);
    let sol = conic::solve(&broadcast_relaxation(problem, scale)?, CONIC_TOLERANCE)?;
    if !sol.is_acceptable(CONIC_ACCEPT, CONIC_GAP_ACCEPT) {
        return Err(BeamformingError::Solver(sol.status));
    }
    let x = denormalize(&sol.variables[0], &problem.power);
    let rank_one_residual = rank_one_ratio(&x);

    let evaluate = |w: DVector<Complex64>| {
        let mut set = PrecoderSet::broadcast(w);
        if let Some(c) = boundary_scale(&set, &problem.power) {
            set.scale(c);
        }
        let (t, _) = balanced_level(&set, &problem.channel, &problem.weights, &problem.noise);
        (t, set)
    };

    let (mut best_t, mut best) = evaluate(principal_precoder(&x));
    for w in gaussian_candidates(&x, n_rand, seed) {
        let phased = phase_projection(&w, &problem.power);
        for cand in [w, phased] {
            let (t, set) = evaluate(cand);
            if t > best_t {
                best_t = t;
                best = set;
            }
        }
    }
    let (refined, extra) = refine_broadcast(problem, best, best_t);
    let (t_star, sinrs) = balanced_level(&refined, &problem.channel, &problem.weights, &problem.noise);
    Ok(BeamformingResult {
        t_star,
        precoders: refined,
        relaxation_bound: scale * sol.objective.max(sol.dual_objective),
        sinrs,
        status: BeamformingStatus::Solved,
        randomizations: n_rand,
        rank_one_residual,
        conic_solves: 1 + extra,
    })
}

/// Successive convex approximation around `v0` in normalized coordinates
/// `w = D^(1/2) v`: each `|v^H g_i|^2` is replaced by its tangent lower
/// bound, and `Z = [V v; v^H 1] >= 0` with `V_nn <= 1` enforces `|v_n| <= 1`.
fn linearized_broadcast(gains: &[DVector<Complex64>], v0: &DVector<Complex64>) -> Result<ConicProgram, ConicError> {
    let n = v0.len();
    let mut prog = ConicProgram::new(vec![n + 1])?.with_scalar();
    prog.set_scalar_objective(1.0)?;
    for g in gains {
        let u0 = g.dotc(v0);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        for j in 0..n {
            let c = u0 * g[j] * 2.0;
            a[(n, j)] = c.conj() / 2.0;
            a[(j, n)] = c / 2.0;
        }
        let a = HermitianMatrix::new(a)?;
        prog.add_constraint(vec![(0, a)], -1.0, Sense::Ge, u0.norm_sqr())?;
    }
    for k in 0..n {
        prog.add_constraint(vec![(0, HermitianMatrix::unit_diagonal(n + 1, k))], 0.0, Sense::Le, 1.0)?;
    }
    prog.add_constraint(vec![(0, HermitianMatrix::unit_diagonal(n + 1, n))], 0.0, Sense::Eq, 1.0)?;
    Ok(prog)
}

/// Monotone local ascent from the randomization winner. Stops on the first
/// step that fails to improve the exact balanced level or on solver trouble.
fn refine_broadcast(problem: &BroadcastProblem, start: PrecoderSet, start_t: f64) -> (PrecoderSet, usize) {
    let root: Vec<f64> = problem.power.iter().map(|p| p.sqrt()).collect();
    let gains: Vec<DVector<Complex64>> = (0..problem.channel.nrows())
        .map(|i| {
            let s = (problem.weights[i] * problem.noise[i]).sqrt();
            DVector::from_fn(root.len(), |j, _| problem.channel[(i, j)] * (root[j] / s))
        })
        .collect();
    let (mut best, mut best_t) = (start, start_t);
    let mut solves = 0;
    for _ in 0..REFINEMENT_ITERATIONS {
        let v0 = DVector::from_fn(root.len(), |j, _| best.weights[0][j] / root[j]);
        let Ok(prog) = linearized_broadcast(&gains, &v0) else { break };
        solves += 1;
        let Ok(sol) = conic::solve(&prog, CONIC_TOLERANCE) else { break };
        if !sol.is_acceptable(CONIC_ACCEPT, CONIC_GAP_ACCEPT) {
            break;
        }
        let z = &sol.variables[0];
        let n = root.len();
        let w = DVector::from_fn(n, |j, _| z.get(j, n) * root[j]);
        let mut set = PrecoderSet::broadcast(w);
        let Some(c) = boundary_scale(&set, &problem.power) else { break };
        set.scale(c);
        let (t, _) = balanced_level(&set, &problem.channel, &problem.weights, &problem.noise);
        if !(t > best_t * (1.0 + REFINEMENT_GAIN)) {
            if t > best_t {
                best = set;
            }
            break;
        }
        best = set;
        best_t = t;
    }
    (best, solves)
}

/// Margin program at level `t`:
/// `max m  s.t.  <G_i, Y_i> / (t gamma_i) - sum_{l != i} <G_i, Y_l> - m >= 1,
/// [sum_k Y_k]_nn <= 1`, with `G_i` normalized by `sigma_i^2` only. The
/// margin is relative to the target level, which keeps it of order one.
fn unicast_margin_program(problem: &UnicastProblem, gains: &[HermitianMatrix], t: f64) -> Result<ConicProgram, ConicError> {
    let n = problem.channel.ncols();
    let users = problem.channel.nrows();
    let mut prog = ConicProgram::new(vec![n; users])?.with_scalar();
    prog.set_scalar_objective(1.0)?;
    for i in 0..users {
        let tg = t * problem.weights[i];
        let terms = (0..users)
            .map(|l| {
                let c = if l == i { 1.0 / tg } else { -1.0 };
                (l, gains[i].scale(c))
            })
            .collect();
        prog.add_constraint(terms, -1.0, Sense::Ge, 1.0)?;
    }
    for k in 0..n {
        let e = HermitianMatrix::unit_diagonal(n, k);
        let terms = (0..users).map(|l| (l, e.clone())).collect();
        prog.add_constraint(terms, 0.0, Sense::Le, 1.0)?;
    }
    Ok(prog)
}

/// Single-user bounds `(sum_n sqrt(P_n) |h_in|)^2 / (gamma_i sigma_i^2)`;
/// the balanced level of either mode cannot exceed the smallest of them.
fn single_user_bound(channel: &DMatrix<Complex64>, power: &[f64], weights: &[f64], noise: &[f64]) -> f64 {
    (0..channel.nrows())
        .map(|i| {
            let s: f64 = channel
                .row(i)
                .iter()
                .zip(power)
                .map(|(h, p)| p.sqrt() * h.norm())
                .sum();
            s * s / (noise[i] * weights[i])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Whether a stalled margin solve still rules the level out: the dual
/// objective bounds the margin from above up to the dual residual.
fn dual_excludes(sol: &ConicSolution) -> bool {
    sol.status == SolveStatus::MaxIterations
        && sol.dual_residual <= DECISIVE_RESIDUAL
        && sol.dual_objective + MARGIN_TOLERANCE < -DECISIVE_FACTOR * sol.dual_residual
}

struct Feasible {
    t: f64,
    precoders: PrecoderSet,
    rank_one_residual: f64,
}

/// Bisection on the balanced level over margin feasibility programs.
///
/// The bracket closes once its width is below `bisection_tol` relative to
/// the upper end; the lower end also jumps to the level achieved by each
/// extracted precoder set.
pub fn solve_unicast_maxmin(
    problem: &UnicastProblem,
    bisection_tol: f64,
) -> Result<BeamformingResult, BeamformingError> {
    if !(bisection_tol > 0.0 && bisection_tol <= 1e-2) {
        return Err(BeamformingError::BadTolerance(bisection_tol));
    }
    let (k, n) = problem.channel.shape();
    if has_zero_row(&problem.channel) {
        return Ok(zero_result(Mode::Unicast, k, k, n));
    }
    let gains: Vec<HermitianMatrix> = (0..k)
        .map(|i| normalized_gain(&row(&problem.channel, i), &problem.power, problem.noise[i]))
        .collect();

    let mut solves = 0;
    let mut test = |t: f64| -> Result<Option<Feasible>, BeamformingError> {
        solves += 1;
        let sol = conic::solve(&unicast_margin_program(problem, &gains, t)?, CONIC_TOLERANCE)?;
        let accepted = sol.is_acceptable(CONIC_ACCEPT, CONIC_GAP_ACCEPT);
        if (!accepted && dual_excludes(&sol)) || (accepted && sol.objective < -MARGIN_TOLERANCE) {
            return Ok(None);
        }
        if !accepted && !matches!(sol.status, SolveStatus::MaxIterations) {
            return Err(BeamformingError::Solver(sol.status));
        }
        let xs: Vec<HermitianMatrix> = sol
            .variables
            .iter()
            .map(|y| denormalize(y, &problem.power))
            .collect();
        let residual = xs.iter().map(rank_one_ratio).fold(0.0, f64::max);
        let mut set = PrecoderSet::unicast(xs.iter().map(principal_precoder).collect());
        if let Some(c) = boundary_scale(&set, &problem.power) {
            set.scale(c);
        }
        let (achieved, _) = balanced_level(&set, &problem.channel, &problem.weights, &problem.noise);
        // a stalled solve only counts through precoders that reach the level
        if !accepted && achieved < t {
            return Err(BeamformingError::Solver(sol.status));
        }
        Ok(Some(Feasible {
            t: achieved,
            precoders: set,
            rank_one_residual: residual,
        }))
    };

    let mut lo = 0.0;
    let mut hi = single_user_bound(&problem.channel, &problem.power, &problem.weights, &problem.noise);
    let mut best: Option<Feasible> = None;
    let mut last_residual = 0.0;
    // the single-user bound is attained when the channels are orthogonal
    if let Some(f) = test(hi)? {
        lo = f.t.min(hi);
        last_residual = f.rank_one_residual;
        best = Some(f);
    }
    while hi - lo > bisection_tol * hi {
        let mid = 0.5 * (lo + hi);
        match test(mid)? {
            Some(f) => {
                lo = mid.max(f.t.min(hi));
                last_residual = f.rank_one_residual;
                if best.as_ref().is_none_or(|b| f.t > b.t) {
                    best = Some(f);
                }
            }
            None => hi = mid,
        }
    }

    let Some(best) = best else {
        // every tested level was infeasible down to the tolerance floor
        let mut r = zero_result(Mode::Unicast, k, k, n);
        r.status = BeamformingStatus::Solved;
        r.relaxation_bound = hi;
        r.conic_solves = solves;
        return Ok(r);
    };
    let (t_star, sinrs) = balanced_level(&best.precoders, &problem.channel, &problem.weights, &problem.noise);
    Ok(BeamformingResult {
        t_star,
        precoders: best.precoders,
        relaxation_bound: hi.max(t_star),
        sinrs,
        status: BeamformingStatus::Solved,
        randomizations: 0,
        rank_one_residual: last_residual,
        conic_solves: solves,
    })
}

/// `count` draws `X^(1/2) xi` with `xi ~ CN(0, I)`, so each has covariance `X`.
pub fn gaussian_candidates(x: &HermitianMatrix, count: usize, seed: u64) -> Vec<DVector<Complex64>> {
    let root = x.sqrt_psd();
    let mut rng = stream_rng(seed, Stream::Randomization);
    (0..count)
        .map(|_| {
            let xi = DVector::from_fn(x.dim(), |_, _| complex_gaussian(&mut rng));
            root.entries() * xi
        })
        .collect()
}

/// Uniform draw of `n` distinct user indices out of `k`, in increasing order.
pub fn schedule_users(k: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, Stream::Scheduling);
    let mut pool: Vec<usize> = (0..k).collect();
    let take = n.min(k);
    for j in 0..take {
        let pick = rng.random_range(j..k);
        pool.swap(j, pick);
    }
    let mut chosen = pool[..take].to_vec();
    chosen.sort_unstable();
    chosen
}

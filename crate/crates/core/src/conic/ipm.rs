//! Homogeneous self-dual primal-dual interior-point method.
//!
//! The complex program is rewritten in the real conic form
//!
//! ```text
//!   minimize c'x  subject to  G x + s = h,  A x = b,  s in K
//! ```
//!
//! where `x` holds the free parameters of every Hermitian variable (real
//! diagonal plus real/imaginary parts of the strict upper triangle) and the
//! optional scalar, and `K` is a nonnegative orthant (the linear
//! inequality rows) times one real PSD block per variable (the real
//! embedding, or the bare scalar for 1x1 variables). Iterates follow the
//! homogeneous embedding with Nesterov-Todd scaling and Mehrotra
//! predictor-corrector steps; the Newton systems are reduced using the
//! block-diagonal structure of the cone Hessian.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use super::hermitian::{real_eigen, HermitianMatrix};
use super::{
    ConicError, ConicProgram, ConicSolution, InfeasibilityCertificate, Sense, SolveStatus,
};

const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.98;
const SIGMA_EXPONENT: i32 = 3;
const REFINEMENT_STEPS: usize = 6;
/// Cone-block error tolerated by refinement, relative to its right-hand side.
/// The step recomputes `W'W dz` from `dx`, so only centrality feels it.
const CONE_SLACK: f64 = 1e-2;
const BACKTRACK: f64 = 0.8;
const MIN_STEP: f64 = 1e-12;
/// Iterations without improving the best merit before giving up.
const STALL_LIMIT: usize = 8;
/// A merit this many times worse than the best one means the reduced
/// Newton systems have lost accuracy.
const DIVERGENCE_FACTOR: f64 = 1e3;
/// Stall and divergence checks only apply once the best iterate is this close.
const NEAR_OPTIMAL: f64 = 1e-5;

/// Parameterization of one Hermitian variable inside `x`.
struct Block {
    n: usize,
    /// Real cone dimension: 1 for scalar variables, `2n` otherwise.
    d: usize,
    offset: usize,
    /// For each parameter, the nonzero entries it contributes to the real
    /// symmetric cone matrix.
    basis: Vec<Vec<(usize, usize, f64)>>,
}

impl Block {
    fn new(n: usize, offset: usize) -> Self {
        if n == 1 {
            return Self {
                n,
                d: 1,
                offset,
                basis: vec![vec![(0, 0, 1.0)]],
            };
        }
        let mut basis = Vec::with_capacity(n * n);
        for j in 0..n {
            basis.push(vec![(j, j, 1.0), (j + n, j + n, 1.0)]);
        }
        for j in 0..n {
            for k in (j + 1)..n {
                basis.push(vec![
                    (j, k, 1.0),
                    (k, j, 1.0),
                    (j + n, k + n, 1.0),
                    (k + n, j + n, 1.0),
                ]);
                basis.push(vec![
                    (j, k + n, -1.0),
                    (k + n, j, -1.0),
                    (k, j + n, 1.0),
                    (j + n, k, 1.0),
                ]);
            }
        }
        Self {
            n,
            d: 2 * n,
            offset,
            basis,
        }
    }

    fn len(&self) -> usize {
        self.n * self.n
    }

    /// Coefficients `a` with `a . params = tr(C X)`.
    fn coefficients(&self, c: &HermitianMatrix) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            out.push(c.get(j, j).re);
        }
        for j in 0..n {
            for k in (j + 1)..n {
                let z = c.get(j, k);
                out.push(2.0 * z.re);
                out.push(2.0 * z.im);
            }
        }
        out
    }

    fn to_hermitian(&self, params: &[f64]) -> HermitianMatrix {
        let n = self.n;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = Complex64::new(params[j], 0.0);
        }
        let mut idx = n;
        for j in 0..n {
            for k in (j + 1)..n {
                let z = Complex64::new(params[idx], params[idx + 1]);
                m[(j, k)] = z;
                m[(k, j)] = z.conj();
                idx += 2;
            }
        }
        HermitianMatrix::new(m).expect("constructed Hermitian")
    }

    /// Cone matrix `Y(x)` for this block's parameters.
    fn embed(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.d, self.d);
        for (a, entries) in self.basis.iter().enumerate() {
            let v = x[self.offset + a];
            if v != 0.0 {
                for &(r, c, w) in entries {
                    y[(r, c)] += w * v;
                }
            }
        }
        y
    }

    /// Adjoint of `embed`: adds `<E_a, U>` into `out[offset + a]`.
    fn adjoint_into(&self, u: &DMatrix<f64>, scale: f64, out: &mut DVector<f64>) {
        for (a, entries) in self.basis.iter().enumerate() {
            let v: f64 = entries.iter().map(|&(r, c, w)| w * u[(r, c)]).sum();
            out[self.offset + a] += scale * v;
        }
    }

    /// Hessian block `B_ab = tr(E_a Q E_b Q)`.
    fn hessian(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.len();
        let mut out = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let mut acc = 0.0;
                for &(p, qq, alpha) in &self.basis[a] {
                    for &(r, s, beta) in &self.basis[b] {
                        acc += alpha * beta * q[(qq, r)] * q[(s, p)];
                    }
                }
                out[(a, b)] = acc;
                out[(b, a)] = acc;
            }
        }
        out
    }
}

/// Element of the cone: linear-row slacks plus one symmetric matrix per block.
#[derive(Clone, Debug)]
struct ConeVec {
    lin: DVector<f64>,
    mats: Vec<DMatrix<f64>>,
}

impl ConeVec {
    fn identity(q: usize, blocks: &[Block]) -> Self {
        Self {
            lin: DVector::from_element(q, 1.0),
            mats: blocks.iter().map(|b| DMatrix::identity(b.d, b.d)).collect(),
        }
    }

    fn dot(&self, other: &ConeVec) -> f64 {
        self.lin.dot(&other.lin)
            + self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| a.dot(b))
                .sum::<f64>()
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn axpy(&mut self, alpha: f64, other: &ConeVec) {
        self.lin.axpy(alpha, &other.lin, 1.0);
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.zip_apply(b, |x, y| *x += alpha * y);
        }
    }

    fn scaled(&self, alpha: f64) -> ConeVec {
        ConeVec {
            lin: self.lin.scale(alpha),
            mats: self.mats.iter().map(|m| m.scale(alpha)).collect(),
        }
    }

    fn sub(&self, other: &ConeVec) -> ConeVec {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

fn circ(a: &ConeVec, b: &ConeVec) -> ConeVec {
    ConeVec {
        lin: a.lin.component_mul(&b.lin),
        mats: a
            .mats
            .iter()
            .zip(&b.mats)
            .map(|(x, y)| {
                // (XY + YX)/2 for symmetric X, Y
                let xy = x * y;
                let yx = xy.transpose();
                (xy + yx).scale(0.5)
            })
            .collect(),
    }
}

struct BlockScaling {
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    /// `(R R')^{-1}`
    q: DMatrix<f64>,
    /// `R R'`
    rrt: DMatrix<f64>,
    lambda: DVector<f64>,
}

/// Nesterov-Todd scaling at the current `(s, z)`.
struct Scaling {
    w: DVector<f64>,
    lambda_lin: DVector<f64>,
    blocks: Vec<BlockScaling>,
}

/// Lower-triangular `L` with `L L' = m`; Cholesky keeps tiny eigenvalues
/// accurate where an iterative eigensolver would not.
fn psd_factor(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(chol) = m.clone().cholesky() {
        return Some(chol.unpack());
    }
    let eig = real_eigen(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = eig.eigenvalues.map(f64::sqrt);
    let mut l = eig.eigenvectors;
    for (j, mut col) in l.column_iter_mut().enumerate() {
        col *= d[j];
    }
    Some(l)
}

impl Scaling {
    fn new(s: &ConeVec, z: &ConeVec) -> Option<Self> {
        let w = s.lin.zip_map(&z.lin, |a, b| (a / b).sqrt());
        let lambda_lin = s.lin.zip_map(&z.lin, |a, b| (a * b).sqrt());
        let mut blocks = Vec::with_capacity(s.mats.len());
        for (sm, zm) in s.mats.iter().zip(&z.mats) {
            let ls = psd_factor(sm)?;
            let lz = psd_factor(zm)?;
            let svd = (lz.transpose() * &ls).svd(true, true);
            let u = svd.u?;
            let vt = svd.v_t?;
            let sing = svd.singular_values;
            if sing.iter().any(|&x| !(x > 0.0)) {
                return None;
            }
            let inv_sqrt = sing.map(|x| 1.0 / x.sqrt());
            // R = L_s V diag(sing)^(-1/2),  R^{-1} = diag(sing)^(-1/2) U' L_z'
            let mut r = ls * vt.transpose();
            for (j, mut col) in r.column_iter_mut().enumerate() {
                col *= inv_sqrt[j];
            }
            let mut r_inv = u.transpose() * lz.transpose();
            for (j, mut row) in r_inv.row_iter_mut().enumerate() {
                row *= inv_sqrt[j];
            }
            let q = r_inv.transpose() * &r_inv;
            let rrt = &r * r.transpose();
            blocks.push(BlockScaling {
                r,
                r_inv,
                q,
                rrt,
                lambda: sing,
            });
        }
        Some(Self {
            w,
            lambda_lin,
            blocks,
        })
    }

    /// `W z`
    fn apply(&self, z: &ConeVec) -> ConeVec {
        ConeVec {
            lin: self.w.component_mul(&z.lin),
            mats: self
                .blocks
                .iter()
                .zip(&z.mats)
                .map(|(b, m)| b.r.transpose() * m * &b.r)
                .collect(),
        }
    }

    /// `W^{-T} s`
    fn apply_inv_t(&self, s: &ConeVec) -> ConeVec {
        ConeVec {
            lin: s.lin.component_div(&self.w),
            mats: self
                .blocks
                .iter()
                .zip(&s.mats)
                .map(|(b, m)| &b.r_inv * m * b.r_inv.transpose())
                .collect(),
        }
    }

    /// `W^T v`
    fn apply_t(&self, v: &ConeVec) -> ConeVec {
        ConeVec {
            lin: self.w.component_mul(&v.lin),
            mats: self
                .blocks
                .iter()
                .zip(&v.mats)
                .map(|(b, m)| &b.r * m * b.r.transpose())
                .collect(),
        }
    }

    /// `W^T W u`
    fn apply_wtw(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lin: u.lin.component_mul(&self.w).component_mul(&self.w),
            mats: self
                .blocks
                .iter()
                .zip(&u.mats)
                .map(|(b, m)| &b.rrt * m * &b.rrt)
                .collect(),
        }
    }

    /// `(W^T W)^{-1} u`
    fn apply_wtw_inv(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lin: u.lin.component_div(&self.w).component_div(&self.w),
            mats: self
                .blocks
                .iter()
                .zip(&u.mats)
                .map(|(b, m)| &b.q * m * &b.q)
                .collect(),
        }
    }

    fn lambda(&self) -> ConeVec {
        ConeVec {
            lin: self.lambda_lin.clone(),
            mats: self
                .blocks
                .iter()
                .map(|b| DMatrix::from_diagonal(&b.lambda))
                .collect(),
        }
    }

    /// Solves `lambda o x = u` for `x`.
    fn lambda_div(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lin: u.lin.component_div(&self.lambda_lin),
            mats: self
                .blocks
                .iter()
                .zip(&u.mats)
                .map(|(b, m)| {
                    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                        2.0 * m[(i, j)] / (b.lambda[i] + b.lambda[j])
                    })
                })
                .collect(),
        }
    }

    /// Largest step `alpha` keeping `lambda + alpha * d` in the cone.
    fn max_step(&self, d: &ConeVec) -> f64 {
        let mut alpha = f64::INFINITY;
        for (l, v) in self.lambda_lin.iter().zip(d.lin.iter()) {
            if *v < 0.0 {
                alpha = alpha.min(-l / v);
            }
        }
        for (b, m) in self.blocks.iter().zip(&d.mats) {
            let inv = b.lambda.map(|x| 1.0 / x.sqrt());
            let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * inv[i] * inv[j]);
            let min_eig = scaled
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_eig < 0.0 {
                alpha = alpha.min(-1.0 / min_eig);
            }
        }
        alpha
    }
}

enum ConstraintRow {
    /// Stored as `scale * sign * (row, rhs)`.
    Lin { row: usize, sign: f64, scale: f64 },
    Eq { row: usize },
}

/// Real conic-form problem data.
struct Standard {
    blocks: Vec<Block>,
    n_b: usize,
    n: usize,
    c: DVector<f64>,
    f: DMatrix<f64>,
    h: DVector<f64>,
    lin_scale: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    rows: Vec<ConstraintRow>,
    has_scalar: bool,
}

impl Standard {
    fn from_program(program: &ConicProgram) -> Self {
        let mut blocks = Vec::new();
        let mut offset = 0;
        for &nv in program.var_dims() {
            let blk = Block::new(nv, offset);
            offset += blk.len();
            blocks.push(blk);
        }
        let n_b = offset;
        let n = n_b + usize::from(program.has_scalar());

        let row_of = |terms: &[(usize, HermitianMatrix)], scalar: f64| {
            let mut row = vec![0.0; n];
            for (v, m) in terms {
                let blk = &blocks[*v];
                for (a, coeff) in blk.coefficients(m).into_iter().enumerate() {
                    row[blk.offset + a] += coeff;
                }
            }
            if program.has_scalar() {
                row[n_b] += scalar;
            }
            row
        };

        let (obj, scalar_obj) = program.objective();
        let mut c = DVector::zeros(n);
        for (v, m) in obj.iter().enumerate() {
            if let Some(m) = m {
                let blk = &blocks[v];
                for (a, coeff) in blk.coefficients(m).into_iter().enumerate() {
                    c[blk.offset + a] -= coeff;
                }
            }
        }
        if program.has_scalar() {
            c[n_b] -= scalar_obj;
        }

        let mut lin_rows = Vec::new();
        let mut lin_rhs = Vec::new();
        let mut lin_scale = Vec::new();
        let mut eq_rows = Vec::new();
        let mut eq_rhs = Vec::new();
        let mut rows = Vec::new();
        for con in program.constraints() {
            let row = row_of(&con.terms, con.scalar_coeff);
            match con.sense {
                Sense::Le | Sense::Ge => {
                    let sign = if con.sense == Sense::Le { 1.0 } else { -1.0 };
                    // unit row norms; the cone is invariant under positive row scaling
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
                    rows.push(ConstraintRow::Lin {
                        row: lin_rows.len(),
                        sign,
                        scale,
                    });
                    lin_scale.push(scale);
                    lin_rows.push(row.into_iter().map(|v| scale * sign * v).collect::<Vec<_>>());
                    lin_rhs.push(scale * sign * con.rhs);
                }
                Sense::Eq => {
                    rows.push(ConstraintRow::Eq { row: eq_rows.len() });
                    eq_rows.push(row);
                    eq_rhs.push(con.rhs);
                }
            }
        }
        let to_matrix = |rows: &[Vec<f64>]| {
            DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
        };
        Self {
            n_b,
            n,
            c,
            f: to_matrix(&lin_rows),
            h: DVector::from_vec(lin_rhs),
            lin_scale: DVector::from_vec(lin_scale),
            a: to_matrix(&eq_rows),
            b: DVector::from_vec(eq_rhs),
            rows,
            has_scalar: program.has_scalar(),
            blocks,
        }
    }

    fn q(&self) -> usize {
        self.f.nrows()
    }

    fn p(&self) -> usize {
        self.a.nrows()
    }

    fn degree(&self) -> usize {
        self.q() + self.blocks.iter().map(|b| b.d).sum::<usize>()
    }

    fn h_cone(&self) -> ConeVec {
        ConeVec {
            lin: self.h.clone(),
            mats: self
                .blocks
                .iter()
                .map(|b| DMatrix::zeros(b.d, b.d))
                .collect(),
        }
    }

    /// `G x`
    fn g_apply(&self, x: &DVector<f64>) -> ConeVec {
        ConeVec {
            lin: &self.f * x,
            mats: self.blocks.iter().map(|b| -b.embed(x)).collect(),
        }
    }

    /// `G' u`
    fn g_t_apply(&self, u: &ConeVec) -> DVector<f64> {
        let mut out = self.f.tr_mul(&u.lin);
        for (b, m) in self.blocks.iter().zip(&u.mats) {
            b.adjoint_into(m, -1.0, &mut out);
        }
        out
    }

    fn h_dot(&self, z: &ConeVec) -> f64 {
        self.h.dot(&z.lin)
    }
}

/// Factorized reduced Newton system `[[H, A'], [A, 0]]`, `H = G' (W'W)^{-1} G`.
///
/// The system is always factored as a whole: eliminating the cone blocks
/// first would invert them individually, and they become nearly singular
/// in exactly the directions the linear rows pin down.
enum Kkt {
    Chol(Cholesky<f64, Dyn>),
    Lu(nalgebra::LU<f64, Dyn, Dyn>),
}

impl Kkt {
    fn factor(std: &Standard, scaling: &Scaling, iteration: usize) -> Result<Self, ConicError> {
        let (n, p) = (std.n, std.p());
        let mut kkt = DMatrix::zeros(n + p, n + p);
        for (b, s) in std.blocks.iter().zip(&scaling.blocks) {
            kkt.view_mut((b.offset, b.offset), (b.len(), b.len()))
                .copy_from(&b.hessian(&s.q));
        }
        let mut fd = std.f.clone();
        for (i, mut row) in fd.row_iter_mut().enumerate() {
            row /= scaling.w[i] * scaling.w[i];
        }
        {
            let mut top = kkt.view_mut((0, 0), (n, n));
            top += std.f.tr_mul(&fd);
        }
        if p == 0 {
            if let Some(chol) = Cholesky::new(kkt.clone()) {
                return Ok(Kkt::Chol(chol));
            }
        }
        kkt.view_mut((n, 0), (p, n)).copy_from(&std.a);
        kkt.view_mut((0, n), (n, p)).copy_from(&std.a.transpose());
        let lu = kkt.lu();
        if !lu.is_invertible() {
            return Err(ConicError::Singular(iteration));
        }
        Ok(Kkt::Lu(lu))
    }

    /// Solves `H dx + A' dy = g1, A dx = g2`.
    fn solve_reduced(
        &self,
        std: &Standard,
        g1: &DVector<f64>,
        g2: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        let (n, p) = (std.n, std.p());
        match self {
            Kkt::Chol(chol) => Some((chol.solve(g1), DVector::zeros(0))),
            Kkt::Lu(lu) => {
                let mut rhs = DVector::zeros(n + p);
                rhs.rows_mut(0, n).copy_from(g1);
                rhs.rows_mut(n, p).copy_from(g2);
                let sol = lu.solve(&rhs)?;
                Some((sol.rows(0, n).into_owned(), sol.rows(n, p).into_owned()))
            }
        }
    }

    fn solve_once(
        &self,
        std: &Standard,
        scaling: &Scaling,
        p1: &DVector<f64>,
        p2: &DVector<f64>,
        p3: &ConeVec,
    ) -> Option<KktSolution> {
        let scaled = scaling.apply_wtw_inv(p3);
        let g1 = p1 - std.g_t_apply(&scaled);
        let g2 = -p2;
        let (dx, dy) = self.solve_reduced(std, &g1, &g2)?;
        let mut wdz = p3.clone();
        wdz.axpy(1.0, &std.g_apply(&dx));
        let dz = scaling.apply_wtw_inv(&wdz);
        Some(KktSolution { dx, dy, dz, wdz })
    }

    /// Solves the 3x3 block system
    /// `A'dy + G'dz = p1, -A dx = p2, -G dx + W'W dz = p3`
    /// with iterative refinement against the unreduced operator.
    fn solve(
        &self,
        std: &Standard,
        scaling: &Scaling,
        p1: &DVector<f64>,
        p2: &DVector<f64>,
        p3: &ConeVec,
    ) -> Option<KktSolution> {
        let residual = |dx: &DVector<f64>, dy: &DVector<f64>, dz: &ConeVec| {
            let e1 = p1 - std.a.tr_mul(dy) - std.g_t_apply(dz);
            let e2 = p2 + &std.a * dx;
            let mut e3 = p3.clone();
            e3.axpy(1.0, &std.g_apply(dx));
            e3.axpy(-1.0, &scaling.apply_wtw(dz));
            let size = (e1.norm_squared() + e2.norm_squared()).sqrt();
            (e1, e2, e3, size)
        };
        let mut sol = self.solve_once(std, scaling, p1, p2, p3)?;
        let (mut e1, mut e2, mut e3, mut size) = residual(&sol.dx, &sol.dy, &sol.dz);
        for _ in 0..REFINEMENT_STEPS {
            let c = self.solve_once(std, scaling, &e1, &e2, &e3)?;
            let next = sol.plus(&c, 1.0);
            let r = residual(&next.dx, &next.dy, &next.dz);
            // refinement diverges once the reduced system is too ill-conditioned
            if !(r.3 < size) || !(r.2.norm() <= e3.norm().max(CONE_SLACK * p3.norm())) {
                break;
            }
            sol = next;
            (e1, e2, e3, size) = r;
        }
        sol.wdz = p3.clone();
        sol.wdz.axpy(1.0, &std.g_apply(&sol.dx));
        Some(sol)
    }
}

/// Solution of the 3x3 block system. `wdz` is `W'W dz` formed before the
/// inverse scaling is applied, so it stays exact where `W'W` is ill-conditioned.
struct KktSolution {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: ConeVec,
    wdz: ConeVec,
}

impl KktSolution {
    fn plus(&self, other: &KktSolution, factor: f64) -> KktSolution {
        let mut dz = self.dz.clone();
        dz.axpy(factor, &other.dz);
        let mut wdz = self.wdz.clone();
        wdz.axpy(factor, &other.wdz);
        KktSolution {
            dx: &self.dx + other.dx.scale(factor),
            dy: &self.dy + other.dy.scale(factor),
            dz,
            wdz,
        }
    }
}

#[derive(Clone)]
struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    s: ConeVec,
    z: ConeVec,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: ConeVec,
    dz: ConeVec,
    dtau: f64,
    dkappa: f64,
}

struct Residuals {
    rx: DVector<f64>,
    ry: DVector<f64>,
    rz: ConeVec,
    rtau: f64,
}

fn residuals(std: &Standard, it: &Iterate) -> Residuals {
    let rx = std.a.tr_mul(&it.y) + std.g_t_apply(&it.z) + std.c.scale(it.tau);
    let ry = std.b.scale(it.tau) - &std.a * &it.x;
    let mut rz = std.h_cone().scaled(it.tau);
    rz.axpy(-1.0, &std.g_apply(&it.x));
    rz.axpy(-1.0, &it.s);
    let rtau = -std.c.dot(&it.x) - std.b.dot(&it.y) - std.h_dot(&it.z) - it.kappa;
    Residuals { rx, ry, rz, rtau }
}

/// Newton direction for residual weight `eta` and complementarity targets
/// `ds_target` (scaled) and `dk_target`.
#[allow(clippy::too_many_arguments)]
fn direction(
    std: &Standard,
    kkt: &Kkt,
    scaling: &Scaling,
    it: &Iterate,
    res: &Residuals,
    u1: &KktSolution,
    eta: f64,
    ds_target: &ConeVec,
    dk_target: f64,
) -> Option<Direction> {
    let r1 = -res.rx.scale(eta);
    let r2 = -res.ry.scale(eta);
    let shifted = scaling.apply_t(&scaling.lambda_div(ds_target));
    let mut r3 = res.rz.scaled(-eta);
    r3.axpy(1.0, &shifted);
    let r4 = -eta * res.rtau + dk_target / it.tau;

    let v0 = kkt.solve(std, scaling, &r1, &r2, &r3)?;
    let num = r4 + std.c.dot(&v0.dx) + std.b.dot(&v0.dy) + std.h_dot(&v0.dz);
    let den = std.c.dot(&u1.dx) + std.b.dot(&u1.dy) + std.h_dot(&u1.dz) + it.kappa / it.tau;
    if !(den.abs() > 0.0) {
        return None;
    }
    let dtau = num / den;
    let KktSolution { dx, dy, dz, wdz } = v0.plus(u1, -dtau);
    let ds = shifted.sub(&wdz);
    let dkappa = (dk_target - it.kappa * dtau) / it.tau;
    Some(Direction {
        dx,
        dy,
        ds,
        dz,
        dtau,
        dkappa,
    })
}

fn step_length(scaling: &Scaling, it: &Iterate, d: &Direction) -> (f64, ConeVec, ConeVec) {
    let ds_scaled = scaling.apply_inv_t(&d.ds);
    let dz_scaled = scaling.apply(&d.dz);
    let mut alpha = scaling.max_step(&ds_scaled).min(scaling.max_step(&dz_scaled));
    if d.dtau < 0.0 {
        alpha = alpha.min(-it.tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        alpha = alpha.min(-it.kappa / d.dkappa);
    }
    (alpha, ds_scaled, dz_scaled)
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `program` to relative accuracy `tolerance`.
pub fn solve(program: &ConicProgram, tolerance: f64) -> Result<ConicSolution, ConicError> {
    if !(tolerance > 0.0 && tolerance <= 1e-2) {
        return Err(ConicError::BadTolerance(tolerance));
    }
    let std = Standard::from_program(program);
    let (q, p, n) = (std.q(), std.p(), std.n);
    let degree = std.degree() as f64;

    let norm_c = std.c.norm().max(1.0);
    let norm_bh = (std.b.norm_squared() + std.h.norm_squared()).sqrt().max(1.0);

    let mut it = Iterate {
        x: DVector::zeros(n),
        y: DVector::zeros(p),
        s: ConeVec::identity(q, &std.blocks),
        z: ConeVec::identity(q, &std.blocks),
        tau: 1.0,
        kappa: 1.0,
    };

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut certificate = None;
    let mut best: Option<(f64, usize, Iterate)> = None;

    for iter in 0..=MAX_ITERATIONS {
        iterations = iter;
        let res = residuals(&std, &it);
        let sz = it.s.dot(&it.z);
        let mu = (sz + it.tau * it.kappa) / (degree + 1.0);

        let pcost = std.c.dot(&it.x) / it.tau;
        let dcost = -(std.b.dot(&it.y) + std.h_dot(&it.z)) / it.tau;
        let pres = (res.ry.norm_squared() + res.rz.norm().powi(2)).sqrt() / it.tau / norm_bh;
        let dual_terms = (std.a.tr_mul(&it.y) + std.g_t_apply(&it.z)).norm() / it.tau;
        let dres = res.rx.norm() / it.tau / norm_c.max(dual_terms);
        let gap = sz / (it.tau * it.tau);
        let scale = 1.0 + pcost.abs();
        if pres <= tolerance
            && dres <= tolerance
            && gap <= tolerance * scale
            && (pcost - dcost).abs() <= tolerance * scale
        {
            status = SolveStatus::Optimal;
            break;
        }

        let hz = std.b.dot(&it.y) + std.h_dot(&it.z);
        if hz < 0.0 {
            let ray = (std.a.tr_mul(&it.y) + std.g_t_apply(&it.z)).norm() / (-hz);
            if ray <= tolerance {
                status = SolveStatus::Infeasible;
                certificate = Some(certificate_from(&std, &it, -hz, ray));
                break;
            }
        }
        let cx = std.c.dot(&it.x);
        if cx < 0.0 {
            let mut gs = std.g_apply(&it.x);
            gs.axpy(1.0, &it.s);
            let ray = (std.a.clone() * &it.x).norm().max(gs.norm()) / (-cx);
            if ray <= tolerance {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        let merit = pres
            .max(dres)
            .max(gap / scale)
            .max((pcost - dcost).abs() / scale);
        match &best {
            Some((m, _, _)) if merit >= *m => {
                let (m, at, _) = best.as_ref().unwrap();
                if *m <= NEAR_OPTIMAL && (merit > DIVERGENCE_FACTOR * m || iter - at >= STALL_LIMIT) {
                    break;
                }
            }
            _ => best = Some((merit, iter, it.clone())),
        }
        if iter == MAX_ITERATIONS {
            break;
        }

        let Some(scaling) = Scaling::new(&it.s, &it.z) else {
            break;
        };
        if let Err(e) = advance(&std, &scaling, &mut it, &res, mu, iter) {
            // late breakdowns keep the best iterate found so far
            match &best {
                Some((m, _, _)) if *m <= NEAR_OPTIMAL => break,
                _ => return Err(e),
            }
        }
        let finite = it.x.iter().all(|v| v.is_finite()) && it.tau.is_finite() && it.tau > 0.0;
        if !finite {
            break;
        }
    }

    if status == SolveStatus::MaxIterations {
        if let Some((_, _, b)) = best {
            it = b;
        }
    }
    Ok(extract(&std, &it, status, iterations, certificate))
}

/// One predictor-corrector step from `it`, kept strictly interior.
fn advance(
    std: &Standard,
    scaling: &Scaling,
    it: &mut Iterate,
    res: &Residuals,
    mu: f64,
    iter: usize,
) -> Result<(), ConicError> {
    let q = std.q();
    let kkt = Kkt::factor(std, scaling, iter)?;
    let h_cone = std.h_cone();
    let u1 = kkt
        .solve(std, scaling, &std.c, &std.b, &h_cone)
        .ok_or(ConicError::Singular(iter))?;

    let lambda = scaling.lambda();
    let lambda_sq = circ(&lambda, &lambda);

    // predictor
    let aff_target = lambda_sq.scaled(-1.0);
    let Some(aff) = direction(
        std,
        &kkt,
        scaling,
        it,
        res,
        &u1,
        1.0,
        &aff_target,
        -it.tau * it.kappa,
    ) else {
        return Err(ConicError::Singular(iter));
    };
    let (alpha_aff, ds_aff, dz_aff) = step_length(scaling, it, &aff);
    let sigma = (1.0 - alpha_aff.min(1.0)).powi(SIGMA_EXPONENT);

    // corrector
    let mut target = lambda_sq.scaled(-1.0);
    let e = ConeVec::identity(q, &std.blocks);
    target.axpy(sigma * mu, &e);
    target.axpy(-1.0, &circ(&ds_aff, &dz_aff));
    let dk_target = -it.tau * it.kappa + sigma * mu - aff.dtau * aff.dkappa;
    let Some(dir) = direction(
        std,
        &kkt,
        scaling,
        it,
        res,
        &u1,
        1.0 - sigma,
        &target,
        dk_target,
    ) else {
        return Err(ConicError::Singular(iter));
    };
    let (alpha_max, _, _) = step_length(scaling, it, &dir);
    let mut alpha = (STEP_FRACTION * alpha_max).min(1.0);
    // the scaled step length can overshoot when the scaling is inexact
    let (s_next, z_next) = loop {
        let mut s_next = it.s.clone();
        let mut z_next = it.z.clone();
        s_next.axpy(alpha, &dir.ds);
        z_next.axpy(alpha, &dir.dz);
        symmetrize(&mut s_next);
        symmetrize(&mut z_next);
        if interior(&s_next) && interior(&z_next) {
            break (s_next, z_next);
        }
        alpha *= BACKTRACK;
        if alpha < MIN_STEP {
            return Err(ConicError::Singular(iter));
        }
    };

    it.x.axpy(alpha, &dir.dx, 1.0);
    it.y.axpy(alpha, &dir.dy, 1.0);
    it.s = s_next;
    it.z = z_next;
    it.tau += alpha * dir.dtau;
    it.kappa += alpha * dir.dkappa;
    Ok(())
}

/// Strict interior test: positive linear part, Cholesky-factorable blocks.
fn interior(v: &ConeVec) -> bool {
    v.lin.iter().all(|&x| x > 0.0) && v.mats.iter().all(|m| m.clone().cholesky().is_some())
}

fn symmetrize(v: &mut ConeVec) {
    for m in v.mats.iter_mut() {
        let t = m.transpose();
        *m = (&*m + t).scale(0.5);
    }
}

fn certificate_from(std: &Standard, it: &Iterate, hz: f64, ray: f64) -> InfeasibilityCertificate {
    let multipliers: Vec<f64> = std
        .rows
        .iter()
        .map(|r| match *r {
            ConstraintRow::Lin { row, sign, scale } => sign * scale * it.z.lin[row] / hz,
            ConstraintRow::Eq { row } => it.y[row] / hz,
        })
        .collect();
    let norm = multipliers.iter().map(|v| v * v).sum::<f64>().sqrt();
    InfeasibilityCertificate {
        multipliers,
        residual: ray,
        margin: if norm > 0.0 { 1.0 / norm } else { f64::INFINITY },
    }
}

fn extract(
    std: &Standard,
    it: &Iterate,
    status: SolveStatus,
    iterations: usize,
    certificate: Option<InfeasibilityCertificate>,
) -> ConicSolution {
    let tau = it.tau;
    let x = it.x.scale(1.0 / tau);
    let variables: Vec<HermitianMatrix> = std
        .blocks
        .iter()
        .map(|b| b.to_hermitian(&x.as_slice()[b.offset..b.offset + b.len()]))
        .collect();
    let scalar = if std.has_scalar { x[std.n_b] } else { 0.0 };
    let objective = -std.c.dot(&x);
    let dual_objective = (std.b.dot(&it.y) + std.h_dot(&it.z)) / tau;
    let duals = std
        .rows
        .iter()
        .map(|r| match *r {
            ConstraintRow::Lin { row, scale, .. } => scale * it.z.lin[row] / tau,
            ConstraintRow::Eq { row } => -it.y[row] / tau,
        })
        .collect();
    let lin_violation = (&std.f * &x - &std.h)
        .component_div(&std.lin_scale)
        .map(|v| v.max(0.0));
    let eq_violation = &std.a * &x - &std.b;
    let primal_residual = max_abs(&lin_violation).max(max_abs(&eq_violation));
    let dual_residual = {
        let terms = std.a.tr_mul(&it.y) + std.g_t_apply(&it.z);
        let size = max_abs(&std.c).max(max_abs(&terms) / tau).max(1.0);
        max_abs(&(terms + std.c.scale(tau))) / tau / size
    };
    ConicSolution {
        status,
        variables,
        scalar,
        objective,
        dual_objective,
        duals,
        duality_gap: (it.s.dot(&it.z) / (tau * tau)).max(0.0),
        primal_residual,
        dual_residual,
        iterations,
        certificate,
    }
}

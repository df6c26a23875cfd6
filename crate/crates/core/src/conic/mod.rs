//! Small dense semidefinite programs over complex Hermitian variables.
//!
//! A [`ConicProgram`] maximizes a linear objective over any number of
//! Hermitian positive-semidefinite matrix variables and an optional free
//! scalar `t`, subject to linear trace constraints
//!
//! ```text
//!   sum_v <A_v, X_v> + a_t * t  (<= | >= | =)  rhs
//! ```
//!
//! Internally every complex variable is lifted to its real symmetric
//! embedding (see [`embed_complex`]) and the program is handed to a
//! homogeneous self-dual interior-point method, so infeasibility and
//! unboundedness are detected from certificates rather than guessed.

mod hermitian;
mod ipm;

pub use hermitian::{embed_complex, HermitianMatrix};
pub use ipm::solve;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
    #[error("matrix is not Hermitian: |M[{row}][{col}] - conj(M[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },
    #[error("variable {var} has dimension {expected} but coefficient has dimension {found}")]
    DimensionMismatch { var: usize, expected: usize, found: usize },
    #[error("variable index {0} out of range")]
    UnknownVariable(usize),
    #[error("constraint references scalar t but the program declares none")]
    NoScalarVariable,
    #[error("non-finite coefficient in program data")]
    NonFinite,
    #[error("tolerance {0} outside (0, 1e-2]")]
    BadTolerance(f64),
    #[error("linear system became singular at iteration {0}")]
    Singular(usize),
}

/// Relation of a constraint's left-hand side to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(usize, HermitianMatrix)>,
    pub scalar_coeff: f64,
    pub sense: Sense,
    pub rhs: f64,
}

/// A maximization problem over PSD Hermitian blocks and an optional free scalar.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    var_dims: Vec<usize>,
    has_scalar: bool,
    objective: Vec<Option<HermitianMatrix>>,
    scalar_objective: f64,
    constraints: Vec<Constraint>,
}

impl ConicProgram {
    pub fn new(var_dims: Vec<usize>) -> Result<Self, ConicError> {
        if var_dims.contains(&0) {
            return Err(ConicError::EmptyMatrix);
        }
        let objective = vec![None; var_dims.len()];
        Ok(Self {
            var_dims,
            has_scalar: false,
            objective,
            scalar_objective: 0.0,
            constraints: Vec::new(),
        })
    }

    /// Adds the free scalar variable `t`.
    pub fn with_scalar(mut self) -> Self {
        self.has_scalar = true;
        self
    }

    pub fn var_dims(&self) -> &[usize] {
        &self.var_dims
    }

    pub fn has_scalar(&self) -> bool {
        self.has_scalar
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> (&[Option<HermitianMatrix>], f64) {
        (&self.objective, self.scalar_objective)
    }

    fn check_term(&self, var: usize, m: &HermitianMatrix) -> Result<(), ConicError> {
        let expected = *self
            .var_dims
            .get(var)
            .ok_or(ConicError::UnknownVariable(var))?;
        if m.dim() != expected {
            return Err(ConicError::DimensionMismatch {
                var,
                expected,
                found: m.dim(),
            });
        }
        if !m.is_finite() {
            return Err(ConicError::NonFinite);
        }
        Ok(())
    }

    pub fn set_objective(&mut self, var: usize, c: HermitianMatrix) -> Result<(), ConicError> {
        self.check_term(var, &c)?;
        self.objective[var] = Some(c);
        Ok(())
    }

    pub fn set_scalar_objective(&mut self, coeff: f64) -> Result<(), ConicError> {
        if !self.has_scalar {
            return Err(ConicError::NoScalarVariable);
        }
        if !coeff.is_finite() {
            return Err(ConicError::NonFinite);
        }
        self.scalar_objective = coeff;
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        terms: Vec<(usize, HermitianMatrix)>,
        scalar_coeff: f64,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, ConicError> {
        for (var, m) in &terms {
            self.check_term(*var, m)?;
        }
        if scalar_coeff != 0.0 && !self.has_scalar {
            return Err(ConicError::NoScalarVariable);
        }
        if !scalar_coeff.is_finite() || !rhs.is_finite() {
            return Err(ConicError::NonFinite);
        }
        self.constraints.push(Constraint {
            terms,
            scalar_coeff,
            sense,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

/// A normalized dual ray proving that no primal point exists.
///
/// The multipliers `y` (one per constraint, signed so that `>=` rows carry
/// nonnegative weight) satisfy `sum_j y_j rhs_j = -1` up to sign convention,
/// while the combination of constraint rows is dual-feasible to within
/// `residual`. `margin` is the separation `1 / ||y||`.
#[derive(Debug, Clone)]
pub struct InfeasibilityCertificate {
    pub multipliers: Vec<f64>,
    pub residual: f64,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub variables: Vec<HermitianMatrix>,
    pub scalar: f64,
    pub objective: f64,
    /// Objective of the dual iterate; an upper bound on the optimum when
    /// the dual residual is negligible.
    pub dual_objective: f64,
    /// One multiplier per constraint (nonnegative for inequalities).
    pub duals: Vec<f64>,
    pub duality_gap: f64,
    pub primal_residual: f64,
    /// Relative to `max(1, |c|, |A'y + G'z|)` in the max norm.
    pub dual_residual: f64,
    pub iterations: usize,
    pub certificate: Option<InfeasibilityCertificate>,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Optimal, or stopped early at a point whose residuals are within
    /// `residual_tol` (absolute) and whose gap is within `gap_tol` relative
    /// to `1 + |objective|`.
    pub fn is_acceptable(&self, residual_tol: f64, gap_tol: f64) -> bool {
        let scale = 1.0 + self.objective.abs();
        match self.status {
            SolveStatus::Optimal => true,
            SolveStatus::MaxIterations => {
                self.primal_residual <= residual_tol
                    && self.dual_residual <= residual_tol
                    && self.duality_gap <= gap_tol * scale
                    && (self.objective - self.dual_objective).abs() <= gap_tol * scale
            }
            _ => false,
        }
    }
}

/// Evaluates a constraint's left-hand side at the given point.
pub fn constraint_value(c: &Constraint, vars: &[HermitianMatrix], scalar: f64) -> f64 {
    c.terms
        .iter()
        .map(|(v, a)| a.inner(&vars[*v]))
        .sum::<f64>()
        + c.scalar_coeff * scalar
}

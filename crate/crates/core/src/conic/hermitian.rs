use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::ConicError;

const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const EIGEN_EPS: f64 = 1e-12;
pub(crate) const EIGEN_MAX_ITER: usize = 10_000;

/// Complex Hermitian matrix, stored exactly symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self, ConicError> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(ConicError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(ConicError::EmptyMatrix);
        }
        for j in 0..rows {
            for k in j..rows {
                let deviation = (data[(j, k)] - data[(k, j)].conj()).norm();
                if deviation > HERMITIAN_TOL || deviation.is_nan() {
                    return Err(ConicError::NotHermitian {
                        row: j,
                        col: k,
                        deviation,
                    });
                }
            }
        }
        Ok(Self::symmetrized(data))
    }

    fn symmetrized(data: DMatrix<Complex64>) -> Self {
        let adjoint = data.adjoint();
        Self {
            data: (data + adjoint).scale(0.5),
        }
    }

    pub fn from_real(data: DMatrix<f64>) -> Result<Self, ConicError> {
        Self::new(data.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    /// The matrix with a single one at diagonal position `k`.
    pub fn unit_diagonal(n: usize, k: usize) -> Self {
        let mut data = DMatrix::zeros(n, n);
        data[(k, k)] = Complex64::new(1.0, 0.0);
        Self { data }
    }

    /// Rank-one outer product `v v^H`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let data = DMatrix::from_fn(n, n, |j, k| v[j] * v[k].conj());
        Self::symmetrized(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|j| self.data[(j, j)].re).sum()
    }

    /// Trace inner product `tr(A B)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: self.data.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = real_eigen(embed_complex(self));
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        vals.into_iter().step_by(2).collect()
    }

    /// Largest eigenvalue and a unit eigenvector for it.
    pub fn principal_eigenpair(&self) -> (f64, DVector<Complex64>) {
        let n = self.dim();
        let eig = real_eigen(embed_complex(self));
        let top = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let col = eig.eigenvectors.column(top);
        let v = DVector::from_fn(n, |j, _| Complex64::new(col[j], col[j + n]));
        (eig.eigenvalues[top], v)
    }

    /// Principal square root of the PSD part (negative eigenvalues clipped).
    pub fn sqrt_psd(&self) -> HermitianMatrix {
        let n = self.dim();
        let eig = real_eigen(embed_complex(self));
        let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let q = &eig.eigenvectors;
        let root = q * DMatrix::from_diagonal(&d) * q.transpose();
        let data = DMatrix::from_fn(n, n, |j, k| Complex64::new(root[(j, k)], root[(j + n, k)]));
        HermitianMatrix::symmetrized(data)
    }
}

/// Standard real embedding `[[Re M, -Im M], [Im M, Re M]]`.
///
/// The embedding is PSD exactly when `M` is, every eigenvalue of `M`
/// appears twice in it, and `<embed(A), embed(B)> = 2 tr(A B)`.
pub fn embed_complex(m: &HermitianMatrix) -> DMatrix<f64> {
    let n = m.dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let z = m.data[(j, k)];
            out[(j, k)] = z.re;
            out[(j + n, k + n)] = z.re;
            out[(j, k + n)] = -z.im;
            out[(j + n, k)] = z.im;
        }
    }
    out
}

pub(crate) fn real_eigen(m: DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let fallback = m.clone();
    SymmetricEigen::try_new(m, EIGEN_EPS, EIGEN_MAX_ITER)
        .unwrap_or_else(|| SymmetricEigen::new(fallback))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn embed_scalar() {
        let m = HermitianMatrix::from_real(DMatrix::from_element(1, 1, 5.0)).unwrap();
        assert_eq!(embed_complex(&m), DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 5.0]));
    }

    #[test]
    fn embed_identity() {
        assert_eq!(embed_complex(&HermitianMatrix::identity(2)), DMatrix::identity(4, 4));
    }

    #[test]
    fn embed_pure_imaginary() {
        let m = HermitianMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)],
        ))
        .unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            -1.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(embed_complex(&m), expected);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(ConicError::NotHermitian { .. })
        ));
        assert!(matches!(
            HermitianMatrix::new(DMatrix::zeros(2, 3)),
            Err(ConicError::NotSquare { .. })
        ));
        assert!(matches!(
            HermitianMatrix::new(DMatrix::zeros(0, 0)),
            Err(ConicError::EmptyMatrix)
        ));
    }

    #[test]
    fn inner_product_matches_trace() {
        let a = HermitianMatrix::outer(&[c(1.0, 0.0), c(0.0, 2.0)]);
        let b = HermitianMatrix::outer(&[c(1.0, 1.0), c(3.0, 0.0)]);
        let direct = (a.entries() * b.entries()).trace().re;
        assert!((a.inner(&b) - direct).abs() < 1e-12);
    }

    #[test]
    fn principal_eigenvector_of_outer_product() {
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        let (lambda, u) = HermitianMatrix::outer(&v).principal_eigenpair();
        assert!((lambda - 1.0).abs() < 1e-12);
        let overlap: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = HermitianMatrix::outer(&[c(1.0, 0.5), c(-0.3, 2.0)])
            .add(&HermitianMatrix::identity(2).scale(0.25));
        let r = a.sqrt_psd();
        let back = r.entries() * r.entries();
        assert!((back - a.entries()).norm() < 1e-10);
    }
}

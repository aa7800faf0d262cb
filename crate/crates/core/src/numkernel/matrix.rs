//! Small dense symmetric-matrix routines: Cholesky, cyclic Jacobi, matrix
//! square roots and the matrix geometric mean.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Real symmetric matrix. Entries are stored exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts a square matrix whose asymmetry is at rounding level and
    /// stores its symmetric part.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Err(Error::domain("empty matrix"));
        }
        Error::check_dim(n, m.ncols())?;
        let scale = m.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                let diff = (m[(i, j)] - m[(j, i)]).abs();
                if !(diff <= SYMMETRY_TOL * scale) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        Ok(Self::symmetrize(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            Error::check_dim(n, r.len())?;
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub(crate) fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SymMatrix(&self.0 * factor)
    }

    /// xᵀ M x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.0[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(self)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    pub fn eigen(&self) -> SymEigen {
        SymEigen::jacobi(self)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Lower-triangular L with L Lᵀ = M.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    pub fn new(m: &SymMatrix) -> Result<Self> {
        let n = m.dim();
        let a = m.matrix();
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves L z = b.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.nrows();
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * z[k];
            }
            z[i] = s / self.l[(i, i)];
        }
        z
    }

    /// Solves Lᵀ x = z.
    pub fn solve_upper(&self, z: &[f64]) -> Vec<f64> {
        let n = self.l.nrows();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.l.nrows();
        let mut inv = DMatrix::<f64>::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        SymMatrix::symmetrize(inv)
    }
}

/// Eigendecomposition M = V diag(λ) Vᵀ, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    /// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops to
    /// 1e-14 of the full norm.
    pub fn jacobi(m: &SymMatrix) -> Self {
        let n = m.dim();
        let mut a = m.matrix().clone();
        let mut v = DMatrix::<f64>::identity(n, n);
        let total = a.norm().max(f64::MIN_POSITIVE);

        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= 1e-14 * total {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
        SymEigen { values, vectors }
    }

    /// V diag(f(λ)) Vᵀ.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            self.values.iter().map(|&l| f(l)),
        ));
        SymMatrix::symmetrize(&self.vectors * d * self.vectors.transpose())
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Principal square root of a positive-definite matrix.
pub fn sqrt_pd(m: &SymMatrix) -> Result<SymMatrix> {
    let e = m.eigen();
    if !(e.min() > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(e.map(f64::sqrt))
}

/// The positive-definite solution Q of Q M⁻¹ Q = N, computed as
/// M^{1/2} (M^{-1/2} N M^{-1/2})^{1/2} M^{1/2}.
pub fn matrix_geometric_mean(m: &SymMatrix, n: &SymMatrix) -> Result<SymMatrix> {
    Error::check_dim(m.dim(), n.dim())?;
    if !m.is_positive_definite() || !n.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let em = m.eigen();
    if !(em.min() > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let half = em.map(f64::sqrt);
    let inv_half = em.map(|l| 1.0 / l.sqrt());
    let inner = SymMatrix::symmetrize(inv_half.matrix() * n.matrix() * inv_half.matrix());
    let root = sqrt_pd(&inner)?;
    Ok(SymMatrix::symmetrize(
        half.matrix() * root.matrix() * half.matrix(),
    ))
}

/// General square matrix inverse and |det| through LU with partial pivoting.
pub(crate) fn invert_general(t: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch {
            expected: t.nrows(),
            got: t.ncols(),
        });
    }
    let lu = t.clone().lu();
    let det = lu.determinant();
    let scale = t.amax().powi(t.nrows() as i32);
    if !(det.abs() > 1e-13 * scale) {
        return Err(Error::Singular);
    }
    let inv = lu.try_inverse().ok_or(Error::Singular)?;
    Ok((inv, det.abs()))
}

//! Independent direct-method ground truth: one-sided Jacobi SVD,
//! Moore-Penrose pseudoinverse, minimal Frobenius-norm (least-squares)
//! solutions and the theoretical contraction rate.
//!
//! Everything here is slow-but-exact desk-scale machinery used by tests,
//! by problem generation, and as the reference the iterative methods are
//! measured against. None of it appears inside an iteration step.

use crate::matrix::{DenseMatrix, MatrixError};
use crate::solvers::Side;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// Jacobi sweeps exceeded the limit; pathological input.
    NoConvergence { sweeps: usize },
    /// All singular values are zero.
    ZeroMatrix,
    Matrix(MatrixError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NoConvergence { sweeps } => {
                write!(f, "Jacobi SVD did not converge within {sweeps} sweeps")
            }
            OracleError::ZeroMatrix => write!(f, "matrix has no nonzero singular value"),
            OracleError::Matrix(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<MatrixError> for OracleError {
    fn from(e: MatrixError) -> Self {
        OracleError::Matrix(e)
    }
}

/// Thin SVD truncated at numerical rank `r`: `A ~ U diag(s) V^T` with
/// `U` (m x r) and `V` (n x r) column-orthonormal and `s` strictly
/// positive, non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
    pub rank_tol: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    /// Smallest retained (nonzero) singular value.
    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().unwrap()
    }

    /// `V diag(1/s) U^T`.
    pub fn pseudoinverse(&self) -> DenseMatrix {
        let m = self.u.rows();
        let n = self.v.rows();
        let mut out = DenseMatrix::zeros(n, m);
        for (k, &s) in self.singular_values.iter().enumerate() {
            let inv = 1.0 / s;
            for i in 0..n {
                let vik = self.v.get(i, k) * inv;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vik * self.u.get(j, k));
                }
            }
        }
        out
    }
}

/// Default relative rank cutoff, scaled with the larger dimension.
pub fn default_rank_tol(a: &DenseMatrix) -> f64 {
    1e-10 * a.rows().max(a.cols()) as f64
}

const MAX_SWEEPS: usize = 30;
const ORTH_EPS: f64 = 1e-14;

/// One-sided Jacobi SVD with the default rank cutoff.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult, OracleError> {
    svd_with_tol(a, default_rank_tol(a))
}

/// One-sided Jacobi SVD. Singular values below `rank_tol * sigma_max`
/// are truncated; the retained count defines the numerical rank.
pub fn svd_with_tol(a: &DenseMatrix, rank_tol: f64) -> Result<SvdResult, OracleError> {
    let flipped = a.rows() < a.cols();
    let work = if flipped { a.transpose() } else { a.clone() };
    let m = work.rows();
    let n = work.cols();

    // columns of the work matrix, rotated in place until pairwise orthogonal
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| work.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= ORTH_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let sigma_max = norms[order[0]];
    if sigma_max == 0.0 {
        return Err(OracleError::ZeroMatrix);
    }
    let rank = order
        .iter()
        .take_while(|&&j| norms[j] > rank_tol * sigma_max)
        .count();

    let mut u = DenseMatrix::zeros(m, rank);
    let mut vv = DenseMatrix::zeros(n, rank);
    let mut singular_values = Vec::with_capacity(rank);
    for (k, &j) in order.iter().take(rank).enumerate() {
        let s = norms[j];
        singular_values.push(s);
        for i in 0..m {
            u.set(i, k, w[j][i] / s);
        }
        for i in 0..n {
            vv.set(i, k, v[j][i]);
        }
    }

    let (u, v) = if flipped { (vv, u) } else { (u, vv) };
    Ok(SvdResult {
        u,
        singular_values,
        v,
        rank_tol,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Moore-Penrose pseudoinverse. `pinv(0) = 0^T` by convention.
pub fn pinv(a: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
    match svd(a) {
        Ok(s) => Ok(s.pseudoinverse()),
        Err(OracleError::ZeroMatrix) => Ok(DenseMatrix::zeros(a.cols(), a.rows())),
        Err(e) => Err(e),
    }
}

/// Minimal Frobenius-norm (least-squares) solution: `A^+ B` for `AX=B`,
/// `C A^+` for `XA=C`.
pub fn min_norm_solution(
    a: &DenseMatrix,
    rhs: &DenseMatrix,
    side: Side,
) -> Result<DenseMatrix, OracleError> {
    let p = pinv(a)?;
    let x = match side {
        Side::AxB => p.matmul(rhs)?,
        Side::XaC => rhs.matmul(&p)?,
    };
    Ok(x)
}

/// Per-iteration expected contraction factor
/// `rho = 1 - sigma_min^2 / ||A||_F^2`, with `sigma_min` the smallest
/// *nonzero* singular value so the rate is defined for rank-deficient
/// coefficients as well.
pub fn contraction_rate(a: &DenseMatrix) -> Result<f64, OracleError> {
    let s = svd(a)?;
    let smin = s.sigma_min();
    let rho = 1.0 - smin * smin / a.frobenius_sq();
    Ok(rho.max(0.0))
}

//! Single-iteration updates for the eight methods.
//!
//! Each step mutates its iterate(s) in place and touches one row or one
//! column of the coefficient, never a matrix-matrix product. Squared
//! slice norms are taken as precomputed slices since the coefficient is
//! constant during a solve. Preconditions (index ranges, shape
//! compatibility) are the caller's responsibility; [`super::solve`]
//! validates them once up front.

use crate::matrix::{Axis, DenseMatrix, KernelCounters, Matrix, RankOneTarget};

/// `target += scale * slice ⊗ vec`, where the selected slice of `a`
/// indexes the rows of `target`.
fn add_outer_rows(
    a: &Matrix,
    axis: Axis,
    index: usize,
    vec: &[f64],
    scale: f64,
    target: &mut DenseMatrix,
    counters: &mut KernelCounters,
) {
    if let (Matrix::Dense(d), Axis::Row) = (a, axis) {
        target
            .rank_one_accumulate(d.row(index), vec, scale, RankOneTarget::Full, counters)
            .expect("outer accumulate shapes");
        return;
    }
    let entries = match axis {
        Axis::Row => a.row_slice_entries(index),
        Axis::Col => a.col_slice_entries(index),
    };
    for (k, v) in entries {
        if v == 0.0 {
            continue;
        }
        target
            .rank_one_accumulate(&[], vec, scale * v, RankOneTarget::Row(k), counters)
            .expect("outer accumulate shapes");
    }
}

/// `target += scale * vec ⊗ slice`, where the selected slice of `a`
/// indexes the columns of `target`.
fn add_outer_cols(
    a: &Matrix,
    axis: Axis,
    index: usize,
    vec: &[f64],
    scale: f64,
    target: &mut DenseMatrix,
    counters: &mut KernelCounters,
) {
    let entries = match axis {
        Axis::Row => a.row_slice_entries(index),
        Axis::Col => a.col_slice_entries(index),
    };
    for (k, v) in entries {
        if v == 0.0 {
            continue;
        }
        target
            .rank_one_accumulate(vec, &[], scale * v, RankOneTarget::Col(k), counters)
            .expect("outer accumulate shapes");
    }
}

/// Kaczmarz row projection for `AX=B`:
/// `X += (A[i,:])^T / M(i) * (B[i,:] - A[i,:] X)`.
/// Afterwards row `i` of the equation holds exactly: `A[i,:] X = B[i,:]`.
pub fn step_rkcax(
    a: &Matrix,
    b: &DenseMatrix,
    row_norms_sq: &[f64],
    x: &mut DenseMatrix,
    i: usize,
    counters: &mut KernelCounters,
) {
    let mut w = a
        .slice_contract(Axis::Row, i, x, counters)
        .expect("rkcax contraction");
    let inv = 1.0 / row_norms_sq[i];
    counters.add_div(1);
    for (wl, &bl) in w.iter_mut().zip(b.row(i)) {
        *wl = (bl - *wl) * inv;
    }
    counters.add_fma(2 * w.len());
    add_outer_rows(a, Axis::Row, i, &w, 1.0, x, counters);
}

/// Kaczmarz column projection for `XA=C`:
/// `X += (C[:,j] - X A[:,j]) / N(j) * (A[:,j])^T`.
pub fn step_rkcxa(
    a: &Matrix,
    c: &DenseMatrix,
    col_norms_sq: &[f64],
    x: &mut DenseMatrix,
    j: usize,
    counters: &mut KernelCounters,
) {
    let mut u = a
        .slice_contract_right(x, Axis::Col, j, counters)
        .expect("rkcxa contraction");
    let inv = 1.0 / col_norms_sq[j];
    counters.add_div(1);
    for (l, ul) in u.iter_mut().enumerate() {
        *ul = (c.get(l, j) - *ul) * inv;
    }
    counters.add_fma(2 * u.len());
    add_outer_cols(a, Axis::Col, j, &u, 1.0, x, counters);
}

/// Coordinate-descent column step for least squares on `AX=B` with the
/// residual `R = B - AX` maintained incrementally:
/// `W = (A[:,j])^T R / N(j)`, `X[j,:] += W`, `R -= A[:,j] W`.
/// Afterwards `(A[:,j])^T R = 0`.
pub fn step_rgsiax(
    a: &Matrix,
    col_norms_sq: &[f64],
    x: &mut DenseMatrix,
    r: &mut DenseMatrix,
    j: usize,
    counters: &mut KernelCounters,
) {
    let mut w = a
        .slice_contract(Axis::Col, j, r, counters)
        .expect("rgsiax contraction");
    let inv = 1.0 / col_norms_sq[j];
    counters.add_div(1);
    for wl in w.iter_mut() {
        *wl *= inv;
    }
    counters.add_fma(w.len());
    x.rank_one_accumulate(&[], &w, 1.0, RankOneTarget::Row(j), counters)
        .expect("rgsiax row update");
    add_outer_rows(a, Axis::Col, j, &w, -1.0, r, counters);
}

/// Coordinate-descent row step for least squares on `XA=C` with
/// `R = C - XA` maintained incrementally:
/// `U = R (A[i,:])^T / M(i)`, `X[:,i] += U`, `R -= U A[i,:]`.
/// Afterwards `R (A[i,:])^T = 0`.
pub fn step_rgsixa(
    a: &Matrix,
    row_norms_sq: &[f64],
    x: &mut DenseMatrix,
    r: &mut DenseMatrix,
    i: usize,
    counters: &mut KernelCounters,
) {
    let mut u = a
        .slice_contract_right(r, Axis::Row, i, counters)
        .expect("rgsixa contraction");
    let inv = 1.0 / row_norms_sq[i];
    counters.add_div(1);
    for ul in u.iter_mut() {
        *ul *= inv;
    }
    counters.add_fma(u.len());
    x.rank_one_accumulate(&u, &[], 1.0, RankOneTarget::Col(i), counters)
        .expect("rgsixa col update");
    add_outer_cols(a, Axis::Row, i, &u, -1.0, r, counters);
}

/// Extended Kaczmarz step for `AX=B` (arbitrary rank). The auxiliary
/// sequence starts at `Z = B` and is driven toward `(I - AA^+)B` by
/// column projections; the main update then projects onto the row-`i`
/// hyperplane of the asymptotically consistent equation:
///
/// `Z -= A[:,j]/N(j) ((A[:,j])^T Z)` then
/// `X += (A[i,:])^T (B[i,:] - Z[i,:] - A[i,:] X) / M(i)`,
/// with the already-updated `Z`.
pub fn step_rekiax(
    a: &Matrix,
    b: &DenseMatrix,
    row_norms_sq: &[f64],
    col_norms_sq: &[f64],
    z: &mut DenseMatrix,
    x: &mut DenseMatrix,
    i: usize,
    j: usize,
    counters: &mut KernelCounters,
) {
    let mut zw = a
        .slice_contract(Axis::Col, j, z, counters)
        .expect("rekiax z contraction");
    let invn = 1.0 / col_norms_sq[j];
    counters.add_div(1);
    for v in zw.iter_mut() {
        *v *= invn;
    }
    counters.add_fma(zw.len());
    add_outer_rows(a, Axis::Col, j, &zw, -1.0, z, counters);

    let mut w = a
        .slice_contract(Axis::Row, i, x, counters)
        .expect("rekiax x contraction");
    let invm = 1.0 / row_norms_sq[i];
    counters.add_div(1);
    for ((wl, &bl), &zl) in w.iter_mut().zip(b.row(i)).zip(z.row(i)) {
        *wl = (bl - zl - *wl) * invm;
    }
    counters.add_fma(3 * w.len());
    add_outer_rows(a, Axis::Row, i, &w, 1.0, x, counters);
}

/// Extended Kaczmarz step for `XA=C`, the transpose mirror of
/// [`step_rekiax`]. The auxiliary sequence starts at `Z = C^T`:
///
/// `Z -= (A[i,:])^T/M(i) (A[i,:] Z)` then
/// `X += (C[:,j] - (Z[j,:])^T - X A[:,j]) / N(j) (A[:,j])^T`.
pub fn step_rekixa(
    a: &Matrix,
    c: &DenseMatrix,
    row_norms_sq: &[f64],
    col_norms_sq: &[f64],
    z: &mut DenseMatrix,
    x: &mut DenseMatrix,
    i: usize,
    j: usize,
    counters: &mut KernelCounters,
) {
    let mut zw = a
        .slice_contract(Axis::Row, i, z, counters)
        .expect("rekixa z contraction");
    let invm = 1.0 / row_norms_sq[i];
    counters.add_div(1);
    for v in zw.iter_mut() {
        *v *= invm;
    }
    counters.add_fma(zw.len());
    add_outer_rows(a, Axis::Row, i, &zw, -1.0, z, counters);

    let mut u = a
        .slice_contract_right(x, Axis::Col, j, counters)
        .expect("rekixa x contraction");
    let invn = 1.0 / col_norms_sq[j];
    counters.add_div(1);
    for (l, ul) in u.iter_mut().enumerate() {
        *ul = (c.get(l, j) - z.get(j, l) - *ul) * invn;
    }
    counters.add_fma(3 * u.len());
    add_outer_cols(a, Axis::Col, j, &u, 1.0, x, counters);
}

/// Extended Gauss-Seidel step for `AX=B`. The inner sequence `Y` (with
/// `R = B - AY`) advances exactly as [`step_rgsiax`]; `X` then takes the
/// one-step Kaczmarz update toward the consistent equation
/// `AX = AY^{(k+1)}`:
///
/// `X -= (A[i,:])^T (A[i,:](X - Y^{(k+1)}) / M(i))`.
#[allow(clippy::too_many_arguments)]
pub fn step_regsiax(
    a: &Matrix,
    row_norms_sq: &[f64],
    col_norms_sq: &[f64],
    y: &mut DenseMatrix,
    r: &mut DenseMatrix,
    x: &mut DenseMatrix,
    i: usize,
    j: usize,
    counters: &mut KernelCounters,
) {
    step_rgsiax(a, col_norms_sq, y, r, j, counters);

    let wx = a
        .slice_contract(Axis::Row, i, x, counters)
        .expect("regsiax x contraction");
    let wy = a
        .slice_contract(Axis::Row, i, y, counters)
        .expect("regsiax y contraction");
    let inv = 1.0 / row_norms_sq[i];
    counters.add_div(1);
    let v: Vec<f64> = wx.iter().zip(&wy).map(|(&x, &y)| (x - y) * inv).collect();
    counters.add_fma(2 * v.len());
    add_outer_rows(a, Axis::Row, i, &v, -1.0, x, counters);
}

/// Extended Gauss-Seidel step for `XA=C`, the mirror of
/// [`step_regsiax`] with `R = C - YA`:
///
/// `X -= ((X - Y^{(k+1)}) A[:,j] / N(j)) (A[:,j])^T`.
#[allow(clippy::too_many_arguments)]
pub fn step_regsixa(
    a: &Matrix,
    row_norms_sq: &[f64],
    col_norms_sq: &[f64],
    y: &mut DenseMatrix,
    r: &mut DenseMatrix,
    x: &mut DenseMatrix,
    i: usize,
    j: usize,
    counters: &mut KernelCounters,
) {
    step_rgsixa(a, row_norms_sq, y, r, i, counters);

    let ux = a
        .slice_contract_right(x, Axis::Col, j, counters)
        .expect("regsixa x contraction");
    let uy = a
        .slice_contract_right(y, Axis::Col, j, counters)
        .expect("regsixa y contraction");
    let inv = 1.0 / col_norms_sq[j];
    counters.add_div(1);
    let v: Vec<f64> = ux.iter().zip(&uy).map(|(&x, &y)| (x - y) * inv).collect();
    counters.add_fma(2 * v.len());
    add_outer_cols(a, Axis::Col, j, &v, -1.0, x, counters);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn d(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn row_norms(a: &Matrix) -> Vec<f64> {
        a.axis_sq_norms(Axis::Row).unwrap()
    }

    fn col_norms(a: &Matrix) -> Vec<f64> {
        a.axis_sq_norms(Axis::Col).unwrap()
    }

    #[test]
    fn rkcax_single_step() {
        let a = Matrix::Dense(d(&[&[3.0, 0.0], &[0.0, 4.0]]));
        let b = d(&[&[3.0, 3.0], &[8.0, 8.0]]);
        let mut x = DenseMatrix::zeros(2, 2);
        let mut c = KernelCounters::new();
        step_rkcax(&a, &b, &row_norms(&a), &mut x, 1, &mut c);
        assert_eq!(x, d(&[&[0.0, 0.0], &[2.0, 2.0]]));

        // identity coefficient: step i copies row i of B
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let b = d(&[&[5.0, -1.0], &[2.0, 9.0]]);
        let mut x = DenseMatrix::zeros(2, 2);
        step_rkcax(&a, &b, &row_norms(&a), &mut x, 0, &mut c);
        assert_eq!(x.row(0), b.row(0));
        assert_eq!(x.row(1), &[0.0, 0.0]);

        // already satisfied row: no change
        let before = x.clone();
        step_rkcax(&a, &b, &row_norms(&a), &mut x, 0, &mut c);
        assert_eq!(x, before);
    }

    #[test]
    fn rkcxa_single_step() {
        // A is 2x1, C is 1x1, X is 1x2
        let a = Matrix::Dense(d(&[&[3.0], &[0.0]]));
        let c_rhs = d(&[&[6.0]]);
        let mut x = DenseMatrix::zeros(1, 2);
        let mut c = KernelCounters::new();
        step_rkcxa(&a, &c_rhs, &col_norms(&a), &mut x, 0, &mut c);
        assert_eq!(x, d(&[&[2.0, 0.0]]));

        // identity: column j of X becomes column j of C
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let c_rhs = d(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let mut x = DenseMatrix::zeros(2, 2);
        step_rkcxa(&a, &c_rhs, &col_norms(&a), &mut x, 1, &mut c);
        assert_eq!(x.col(1), c_rhs.col(1));

        // satisfied column: unchanged
        let before = x.clone();
        step_rkcxa(&a, &c_rhs, &col_norms(&a), &mut x, 1, &mut c);
        assert_eq!(x, before);
    }

    #[test]
    fn rgsiax_single_step() {
        let a = Matrix::Dense(d(&[&[1.0], &[1.0]]));
        let b = d(&[&[1.0], &[3.0]]);
        let mut x = DenseMatrix::zeros(1, 1);
        let mut r = b.clone();
        let mut c = KernelCounters::new();
        step_rgsiax(&a, &col_norms(&a), &mut x, &mut r, 0, &mut c);
        assert_eq!(x.get(0, 0), 2.0);
        assert_eq!(r, d(&[&[-1.0], &[1.0]]));

        // solved state: zero residual leaves everything unchanged
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let mut x = d(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let mut r = DenseMatrix::zeros(2, 2);
        let before = x.clone();
        step_rgsiax(&a, &col_norms(&a), &mut x, &mut r, 1, &mut c);
        assert_eq!(x, before);
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn rgsixa_single_step() {
        // A = [[1,1]], C = [[1,3]], X 1x1, R = C
        let a = Matrix::Dense(d(&[&[1.0, 1.0]]));
        let c_rhs = d(&[&[1.0, 3.0]]);
        let mut x = DenseMatrix::zeros(1, 1);
        let mut r = c_rhs.clone();
        let mut c = KernelCounters::new();
        step_rgsixa(&a, &row_norms(&a), &mut x, &mut r, 0, &mut c);
        assert_eq!(x.get(0, 0), 2.0);
        assert_eq!(r, d(&[&[-1.0, 1.0]]));

        // zero residual: unchanged
        let before = x.clone();
        let rbefore = DenseMatrix::zeros(1, 2);
        let mut rz = rbefore.clone();
        step_rgsixa(&a, &row_norms(&a), &mut x, &mut rz, 0, &mut c);
        assert_eq!(x, before);
        assert_eq!(rz, rbefore);
    }

    #[test]
    fn rekiax_single_step() {
        let a = Matrix::Dense(d(&[&[1.0], &[1.0]]));
        let b = d(&[&[1.0], &[3.0]]);
        let mut z = b.clone();
        let mut x = DenseMatrix::zeros(1, 1);
        let mut c = KernelCounters::new();
        step_rekiax(&a, &b, &row_norms(&a), &col_norms(&a), &mut z, &mut x, 0, 0, &mut c);
        assert_eq!(z, d(&[&[-1.0], &[1.0]]));
        // X picks up exactly A+B = 2 in one step here
        assert_eq!(x.get(0, 0), 2.0);

        // Z already orthogonal to the column: Z unchanged by the z-leg
        let mut z2 = d(&[&[-1.0], &[1.0]]);
        let zbefore = z2.clone();
        let mut x2 = x.clone();
        step_rekiax(&a, &b, &row_norms(&a), &col_norms(&a), &mut z2, &mut x2, 1, 0, &mut c);
        assert_eq!(z2, zbefore);
    }

    #[test]
    fn rekixa_single_step() {
        // transpose of the rekiax example
        let a = Matrix::Dense(d(&[&[1.0, 1.0]]));
        let c_rhs = d(&[&[1.0, 3.0]]);
        let mut z = c_rhs.transpose();
        let mut x = DenseMatrix::zeros(1, 1);
        let mut c = KernelCounters::new();
        step_rekixa(&a, &c_rhs, &row_norms(&a), &col_norms(&a), &mut z, &mut x, 0, 0, &mut c);
        assert_eq!(x.get(0, 0), 2.0);
        assert_eq!(z, d(&[&[-1.0], &[1.0]]));
    }

    #[test]
    fn regsiax_fixed_point() {
        // X = Y = A+B is a fixed point of both legs
        let a = Matrix::Dense(d(&[&[1.0], &[1.0]]));
        let b = d(&[&[1.0], &[3.0]]);
        let sol = d(&[&[2.0]]);
        let mut y = sol.clone();
        let mut r = d(&[&[-1.0], &[1.0]]); // B - A*Y
        let mut x = sol.clone();
        let mut c = KernelCounters::new();
        for i in 0..2 {
            step_regsiax(&a, &row_norms(&a), &col_norms(&a), &mut y, &mut r, &mut x, i, 0, &mut c);
            assert!((x.get(0, 0) - 2.0).abs() < 1e-15);
            assert!((y.get(0, 0) - 2.0).abs() < 1e-15);
        }

        // identity coefficient: touched row of X tracks B
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let b = d(&[&[4.0, 5.0], &[6.0, 7.0]]);
        let mut y = DenseMatrix::zeros(2, 2);
        let mut r = b.clone();
        let mut x = DenseMatrix::zeros(2, 2);
        step_regsiax(&a, &row_norms(&a), &col_norms(&a), &mut y, &mut r, &mut x, 0, 0, &mut c);
        assert_eq!(x.row(0), b.row(0));
    }

    #[test]
    fn regsixa_fixed_point() {
        let a = Matrix::Dense(d(&[&[1.0, 1.0]]));
        let c_rhs = d(&[&[1.0, 3.0]]);
        let sol = d(&[&[2.0]]);
        let mut y = sol.clone();
        let mut r = d(&[&[-1.0, 1.0]]); // C - Y*A
        let mut x = sol.clone();
        let mut c = KernelCounters::new();
        for j in 0..2 {
            step_regsixa(&a, &row_norms(&a), &col_norms(&a), &mut y, &mut r, &mut x, 0, j, &mut c);
            assert!((x.get(0, 0) - 2.0).abs() < 1e-15);
        }

        // X = Y leaves X unchanged
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let mut y = d(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let mut x = y.clone();
        let mut r = DenseMatrix::zeros(2, 2);
        let before = x.clone();
        step_regsixa(&a, &row_norms(&a), &col_norms(&a), &mut y, &mut r, &mut x, 0, 0, &mut c);
        assert_eq!(x, before);
    }
}

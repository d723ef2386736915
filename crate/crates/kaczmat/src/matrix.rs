//! Dense and sparse matrix storage plus the low-level kernels the
//! iterative methods consume: row/column contractions and rank-one
//! accumulations, instrumented with per-solve operation counters so
//! per-iteration cost claims are testable.
//!
//! Storage is `f64` throughout. Dense matrices are row-major; sparse
//! matrices keep compressed-row storage with a compressed-column mirror
//! built once up front, because the extended methods need fast access to
//! both rows and columns of the same coefficient.

use std::fmt;

/// Row or column orientation for norm and contraction kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Col => write!(f, "column"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// Shape with zero rows or columns.
    EmptyShape,
    /// Backing data length does not match `rows * cols`.
    DataLength { expected: usize, got: usize },
    /// NaN or infinite entry at construction.
    NonFinite { row: usize, col: usize },
    /// Shapes incompatible for the requested operation.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Slice index outside `[0, len)`.
    IndexOutOfRange { index: usize, len: usize },
    /// A row or column with zero squared norm where one is forbidden.
    ZeroSlice { axis: Axis, index: usize },
    /// Malformed sparse structure (unsorted/duplicate/out-of-range indices).
    InvalidSparse(String),
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::EmptyShape => write!(f, "matrix must have positive dimensions"),
            MatrixError::DataLength { expected, got } => {
                write!(f, "data length {got} does not match rows*cols = {expected}")
            }
            MatrixError::NonFinite { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            MatrixError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            MatrixError::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            MatrixError::ZeroSlice { axis, index } => {
                write!(f, "{axis} {index} has zero norm")
            }
            MatrixError::InvalidSparse(msg) => write!(f, "invalid sparse structure: {msg}"),
        }
    }
}

impl std::error::Error for MatrixError {}

/// Fused multiply-add and scalar division counts for one solve.
///
/// Counters are owned by a single solve, never shared; they only grow
/// while the solve runs and are reset between solves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelCounters {
    pub fma: u64,
    pub divisions: u64,
}

impl KernelCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    #[inline]
    pub(crate) fn add_fma(&mut self, n: usize) {
        self.fma += n as u64;
    }

    #[inline]
    pub(crate) fn add_div(&mut self, n: usize) {
        self.divisions += n as u64;
    }
}

/// Target of a rank-one accumulation: the whole matrix, a single row,
/// or a single column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOneTarget {
    /// `M += scale * u * v^T`; uses both `u` (len = rows) and `v` (len = cols).
    Full,
    /// `M[i, :] += scale * v`; uses `v` only.
    Row(usize),
    /// `M[:, j] += scale * u`; uses `u` only.
    Col(usize),
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyShape);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::DataLength {
                expected: rows * cols,
                got: data.len(),
            });
        }
        for (k, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite {
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        if rows.is_empty() {
            return Err(MatrixError::EmptyShape);
        }
        let cols = rows[0].len();
        for r in rows {
            if r.len() != cols {
                return Err(MatrixError::DataLength {
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// `self * other`. Not used inside iteration loops; this exists for
    /// the oracle, problem generation and stop metrics.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, other.cols),
                got: (other.rows, other.cols),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// `v^T * self` for a vector with `self.rows` entries.
    pub fn vecmat(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if v.len() != self.rows {
            return Err(MatrixError::DataLength {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    /// `self * v` for a vector with `self.cols` entries.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::DataLength {
                expected: self.cols,
                got: v.len(),
            });
        }
        let out = (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect();
        Ok(out)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix, MatrixError> {
        if self.shape() != other.shape() {
            return Err(MatrixError::DimensionMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|&v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Squared 2-norm of every row (`Axis::Row`, length `rows`) or every
    /// column (`Axis::Col`, length `cols`). Errors when any slice is
    /// exactly zero: an all-zero row or column makes the norm-weighted
    /// sampling probabilities degenerate.
    pub fn axis_sq_norms(&self, axis: Axis) -> Result<Vec<f64>, MatrixError> {
        let norms = match axis {
            Axis::Row => (0..self.rows)
                .map(|i| self.row(i).iter().map(|&v| v * v).sum())
                .collect::<Vec<f64>>(),
            Axis::Col => {
                let mut out = vec![0.0; self.cols];
                for i in 0..self.rows {
                    for (o, &v) in out.iter_mut().zip(self.row(i)) {
                        *o += v * v;
                    }
                }
                out
            }
        };
        if let Some(index) = norms.iter().position(|&n| n == 0.0) {
            return Err(MatrixError::ZeroSlice { axis, index });
        }
        Ok(norms)
    }

    /// `M += scale * u v^T` for `Full`, or a single-slice accumulate for
    /// `Row`/`Col`. Counters grow by exactly the touched-entry count.
    pub fn rank_one_accumulate(
        &mut self,
        u: &[f64],
        v: &[f64],
        scale: f64,
        target: RankOneTarget,
        counters: &mut KernelCounters,
    ) -> Result<(), MatrixError> {
        if !scale.is_finite() {
            return Err(MatrixError::NonFinite { row: 0, col: 0 });
        }
        if scale == 0.0 {
            return Ok(());
        }
        match target {
            RankOneTarget::Full => {
                if u.len() != self.rows {
                    return Err(MatrixError::DataLength {
                        expected: self.rows,
                        got: u.len(),
                    });
                }
                if v.len() != self.cols {
                    return Err(MatrixError::DataLength {
                        expected: self.cols,
                        got: v.len(),
                    });
                }
                for (i, &ui) in u.iter().enumerate() {
                    let s = scale * ui;
                    for (m, &vj) in self.row_mut(i).iter_mut().zip(v) {
                        *m += s * vj;
                    }
                }
                counters.add_fma(self.rows * self.cols);
            }
            RankOneTarget::Row(i) => {
                if i >= self.rows {
                    return Err(MatrixError::IndexOutOfRange {
                        index: i,
                        len: self.rows,
                    });
                }
                if v.len() != self.cols {
                    return Err(MatrixError::DataLength {
                        expected: self.cols,
                        got: v.len(),
                    });
                }
                for (m, &vj) in self.row_mut(i).iter_mut().zip(v) {
                    *m += scale * vj;
                }
                counters.add_fma(self.cols);
            }
            RankOneTarget::Col(j) => {
                if j >= self.cols {
                    return Err(MatrixError::IndexOutOfRange {
                        index: j,
                        len: self.cols,
                    });
                }
                if u.len() != self.rows {
                    return Err(MatrixError::DataLength {
                        expected: self.rows,
                        got: u.len(),
                    });
                }
                let cols = self.cols;
                for (i, &ui) in u.iter().enumerate() {
                    self.data[i * cols + j] += scale * ui;
                }
                counters.add_fma(self.rows);
            }
        }
        Ok(())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Compressed-row sparse matrix with a compressed-column mirror.
///
/// Invariants enforced at construction: strictly increasing column
/// indices within each row, no stored zero values, and no all-zero row
/// or column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    row_val: Vec<f64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_val: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from coordinate triplets. Duplicate coordinates are summed;
    /// entries that cancel to exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyShape);
        }
        for &(i, j, v) in triplets {
            if i >= rows {
                return Err(MatrixError::IndexOutOfRange { index: i, len: rows });
            }
            if j >= cols {
                return Err(MatrixError::IndexOutOfRange { index: j, len: cols });
            }
            if !v.is_finite() {
                return Err(MatrixError::NonFinite { row: i, col: j });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);

        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<usize> = merged.iter().map(|t| t.1).collect();
        let row_val: Vec<f64> = merged.iter().map(|t| t.2).collect();

        // column mirror
        let mut col_ptr = vec![0usize; cols + 1];
        for &(_, j, _) in &merged {
            col_ptr[j + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut fill = col_ptr.clone();
        let mut row_idx = vec![0usize; merged.len()];
        let mut col_val = vec![0.0; merged.len()];
        for &(i, j, v) in &merged {
            let pos = fill[j];
            row_idx[pos] = i;
            col_val[pos] = v;
            fill[j] += 1;
        }

        let m = Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            row_val,
            col_ptr,
            row_idx,
            col_val,
        };
        for i in 0..rows {
            if m.row_ptr[i] == m.row_ptr[i + 1] {
                return Err(MatrixError::ZeroSlice {
                    axis: Axis::Row,
                    index: i,
                });
            }
        }
        for j in 0..cols {
            if m.col_ptr[j] == m.col_ptr[j + 1] {
                return Err(MatrixError::ZeroSlice {
                    axis: Axis::Col,
                    index: j,
                });
            }
        }
        Ok(m)
    }

    pub fn from_dense(d: &DenseMatrix) -> Result<Self, MatrixError> {
        let mut triplets = Vec::new();
        for i in 0..d.rows() {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(d.rows(), d.cols(), &triplets)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.set(i, self.col_idx[k], self.row_val[k]);
            }
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_val.len()
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.row_val[r].iter().copied())
    }

    pub fn col_entries(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.col_val[r].iter().copied())
    }

    /// Iterates stored entries in row-major order as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row_entries(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let triplets: Vec<(usize, usize, f64)> =
            self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        // invariants hold for the transpose whenever they hold for self
        SparseMatrix::from_triplets(self.cols, self.rows, &triplets)
            .expect("transpose of a valid sparse matrix is valid")
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.row_val.iter().map(|&v| v * v).sum()
    }

    pub fn axis_sq_norms(&self, axis: Axis) -> Result<Vec<f64>, MatrixError> {
        let (n, norms): (usize, Vec<f64>) = match axis {
            Axis::Row => (
                self.rows,
                (0..self.rows)
                    .map(|i| self.row_entries(i).map(|(_, v)| v * v).sum())
                    .collect(),
            ),
            Axis::Col => (
                self.cols,
                (0..self.cols)
                    .map(|j| self.col_entries(j).map(|(_, v)| v * v).sum())
                    .collect(),
            ),
        };
        debug_assert_eq!(norms.len(), n);
        if let Some(index) = norms.iter().position(|&v| v == 0.0) {
            return Err(MatrixError::ZeroSlice { axis, index });
        }
        Ok(norms)
    }

    /// `self * x` touching stored entries only.
    pub fn mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if x.rows() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, x.cols()),
                got: x.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, x.cols());
        for i in 0..self.rows {
            for (k, v) in self.row_entries(i) {
                let xrow = x.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(xrow) {
                    *o += v * b;
                }
            }
        }
        Ok(out)
    }
}

/// Coefficient matrix in either storage form. Iterates (`X`, `Y`, `Z`,
/// `R`) are always dense; only the coefficient `A` benefits from a
/// sparse representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl From<DenseMatrix> for Matrix {
    fn from(d: DenseMatrix) -> Self {
        Matrix::Dense(d)
    }
}

impl From<SparseMatrix> for Matrix {
    fn from(s: SparseMatrix) -> Self {
        Matrix::Sparse(s)
    }
}

/// Iterator over the entries of one row or column of a [`Matrix`].
/// Dense slices yield every position; sparse slices yield stored
/// entries only.
pub enum SliceEntries<'a> {
    DenseRow(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
    DenseCol {
        m: &'a DenseMatrix,
        j: usize,
        i: usize,
    },
    Sparse(std::iter::Zip<SparseIdxIter<'a>, SparseValIter<'a>>),
}

type SparseIdxIter<'a> = std::iter::Copied<std::slice::Iter<'a, usize>>;
type SparseValIter<'a> = std::iter::Copied<std::slice::Iter<'a, f64>>;

impl<'a> Iterator for SliceEntries<'a> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            SliceEntries::DenseRow(it) => it.next().map(|(j, &v)| (j, v)),
            SliceEntries::DenseCol { m, j, i } => {
                if *i < m.rows() {
                    let item = (*i, m.get(*i, *j));
                    *i += 1;
                    Some(item)
                } else {
                    None
                }
            }
            SliceEntries::Sparse(it) => it.next(),
        }
    }
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.rows(),
            Matrix::Sparse(s) => s.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.cols(),
            Matrix::Sparse(s) => s.cols(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(d) => d.clone(),
            Matrix::Sparse(s) => s.to_dense(),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        match self {
            Matrix::Dense(d) => d.frobenius_sq(),
            Matrix::Sparse(s) => s.frobenius_sq(),
        }
    }

    pub fn axis_sq_norms(&self, axis: Axis) -> Result<Vec<f64>, MatrixError> {
        match self {
            Matrix::Dense(d) => d.axis_sq_norms(axis),
            Matrix::Sparse(s) => s.axis_sq_norms(axis),
        }
    }

    pub fn row_slice_entries(&self, i: usize) -> SliceEntries<'_> {
        match self {
            Matrix::Dense(d) => SliceEntries::DenseRow(d.row(i).iter().enumerate()),
            Matrix::Sparse(s) => {
                let r = s.row_ptr[i]..s.row_ptr[i + 1];
                SliceEntries::Sparse(
                    s.col_idx[r.clone()]
                        .iter()
                        .copied()
                        .zip(s.row_val[r].iter().copied()),
                )
            }
        }
    }

    pub fn col_slice_entries(&self, j: usize) -> SliceEntries<'_> {
        match self {
            Matrix::Dense(d) => SliceEntries::DenseCol { m: d, j, i: 0 },
            Matrix::Sparse(s) => {
                let r = s.col_ptr[j]..s.col_ptr[j + 1];
                SliceEntries::Sparse(
                    s.row_idx[r.clone()]
                        .iter()
                        .copied()
                        .zip(s.col_val[r].iter().copied()),
                )
            }
        }
    }

    fn check_index(&self, axis: Axis, index: usize) -> Result<(), MatrixError> {
        let len = match axis {
            Axis::Row => self.rows(),
            Axis::Col => self.cols(),
        };
        if index >= len {
            return Err(MatrixError::IndexOutOfRange { index, len });
        }
        Ok(())
    }

    /// Contract one slice of `self` against `m` from the left:
    /// `Axis::Row` computes `A[i, :] * m` (`m` has `self.cols()` rows),
    /// `Axis::Col` computes `A[:, j]^T * m` (`m` has `self.rows()` rows).
    /// For sparse coefficients only stored entries are touched.
    pub fn slice_contract(
        &self,
        axis: Axis,
        index: usize,
        m: &DenseMatrix,
        counters: &mut KernelCounters,
    ) -> Result<Vec<f64>, MatrixError> {
        self.check_index(axis, index)?;
        let expected_rows = match axis {
            Axis::Row => self.cols(),
            Axis::Col => self.rows(),
        };
        if m.rows() != expected_rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (expected_rows, m.cols()),
                got: m.shape(),
            });
        }
        let p = m.cols();
        let mut out = vec![0.0; p];
        let entries = match axis {
            Axis::Row => self.row_slice_entries(index),
            Axis::Col => self.col_slice_entries(index),
        };
        let mut touched = 0usize;
        for (k, a) in entries {
            touched += 1;
            if a == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(m.row(k)) {
                *o += a * b;
            }
        }
        counters.add_fma(touched * p);
        Ok(out)
    }

    /// Contract `m` against one slice of `self` from the right:
    /// `Axis::Col` computes `m * A[:, j]` (`m` has `self.rows()` columns),
    /// `Axis::Row` computes `m * A[i, :]^T` (`m` has `self.cols()` columns).
    pub fn slice_contract_right(
        &self,
        m: &DenseMatrix,
        axis: Axis,
        index: usize,
        counters: &mut KernelCounters,
    ) -> Result<Vec<f64>, MatrixError> {
        self.check_index(axis, index)?;
        let expected_cols = match axis {
            Axis::Row => self.cols(),
            Axis::Col => self.rows(),
        };
        if m.cols() != expected_cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (m.rows(), expected_cols),
                got: m.shape(),
            });
        }
        let rows = m.rows();
        let mut out = vec![0.0; rows];
        let entries = match axis {
            Axis::Row => self.row_slice_entries(index),
            Axis::Col => self.col_slice_entries(index),
        };
        let mut touched = 0usize;
        for (k, a) in entries {
            touched += 1;
            if a == 0.0 {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += a * m.get(r, k);
            }
        }
        counters.add_fma(touched * rows);
        Ok(out)
    }

    /// `self * x` (dense result). Used by problem generation and stop
    /// metrics, never inside an iteration step.
    pub fn mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        match self {
            Matrix::Dense(d) => d.matmul(x),
            Matrix::Sparse(s) => s.mul_dense(x),
        }
    }

    /// `x * self` (dense result).
    pub fn rmul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if x.cols() != self.rows() {
            return Err(MatrixError::DimensionMismatch {
                expected: (x.rows(), self.rows()),
                got: x.shape(),
            });
        }
        match self {
            Matrix::Dense(d) => x.matmul(d),
            Matrix::Sparse(s) => {
                let mut out = DenseMatrix::zeros(x.rows(), s.cols());
                for (i, j, v) in s.triplets() {
                    for r in 0..x.rows() {
                        let add = v * x.get(r, i);
                        let cur = out.get(r, j);
                        out.set(r, j, cur + add);
                    }
                }
                Ok(out)
            }
        }
    }

    /// `self^T * x` (dense result), for the normal-equations stop metric.
    pub fn transpose_mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if x.rows() != self.rows() {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.rows(), x.cols()),
                got: x.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.cols(), x.cols());
        match self {
            Matrix::Dense(d) => {
                for i in 0..d.rows() {
                    let xrow = x.row(i);
                    for (j, &a) in d.row(i).iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        for (o, &b) in out.row_mut(j).iter_mut().zip(xrow) {
                            *o += a * b;
                        }
                    }
                }
            }
            Matrix::Sparse(s) => {
                for (i, j, v) in s.triplets() {
                    let xrow = x.row(i);
                    for (o, &b) in out.row_mut(j).iter_mut().zip(xrow) {
                        *o += v * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `x * self^T` (dense result), mirrored metric helper for `XA=C`.
    pub fn mul_transpose_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if x.cols() != self.cols() {
            return Err(MatrixError::DimensionMismatch {
                expected: (x.rows(), self.cols()),
                got: x.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(x.rows(), self.rows());
        match self {
            Matrix::Dense(d) => {
                for r in 0..x.rows() {
                    let xrow = x.row(r);
                    for i in 0..d.rows() {
                        out.set(r, i, dot(xrow, d.row(i)));
                    }
                }
            }
            Matrix::Sparse(s) => {
                for (i, j, v) in s.triplets() {
                    for r in 0..x.rows() {
                        let cur = out.get(r, i);
                        out.set(r, i, cur + v * x.get(r, j));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn frobenius_single_row() {
        assert_eq!(d(&[&[3.0, 4.0]]).frobenius_sq(), 25.0);
    }

    #[test]
    fn frobenius_identity() {
        assert_eq!(DenseMatrix::identity(3).frobenius_sq(), 3.0);
    }

    #[test]
    fn frobenius_direct_sum() {
        // direct summation oracle: 1 + 4 + 4 + 4 = 13
        let m = d(&[&[1.0, 2.0], &[2.0, 2.0]]);
        let oracle: f64 = m.data().iter().map(|v| v * v).sum();
        assert_eq!(m.frobenius_sq(), oracle);
        assert_eq!(m.frobenius_sq(), 13.0);
    }

    #[test]
    fn axis_norms_examples() {
        let m = d(&[&[1.0, 2.0], &[2.0, 2.0]]);
        assert_eq!(m.axis_sq_norms(Axis::Row).unwrap(), vec![5.0, 8.0]);
        assert_eq!(m.axis_sq_norms(Axis::Col).unwrap(), vec![5.0, 8.0]);
        assert_eq!(
            DenseMatrix::identity(2).axis_sq_norms(Axis::Row).unwrap(),
            vec![1.0, 1.0]
        );
    }

    #[test]
    fn axis_norms_zero_slice() {
        let m = d(&[&[1.0, 0.0], &[2.0, 0.0]]);
        match m.axis_sq_norms(Axis::Col) {
            Err(MatrixError::ZeroSlice {
                axis: Axis::Col,
                index: 1,
            }) => {}
            other => panic!("expected ZeroSlice, got {other:?}"),
        }
    }

    #[test]
    fn slice_contract_examples() {
        let mut c = KernelCounters::new();
        // A = [[1,2]], row 0 against M (2x2): [1*1+2*1, 1*1+2*0] = [3, 1]
        let a = Matrix::Dense(d(&[&[1.0, 2.0]]));
        let m = d(&[&[1.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            a.slice_contract(Axis::Row, 0, &m, &mut c).unwrap(),
            vec![3.0, 1.0]
        );

        // identity row selects
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let m = d(&[&[5.0, 6.0], &[7.0, 8.0]]);
        assert_eq!(
            a.slice_contract(Axis::Row, 1, &m, &mut c).unwrap(),
            vec![7.0, 8.0]
        );

        // column contraction: A = [[1],[1]], col 0 against M = [[1],[3]] -> [4]
        let a = Matrix::Dense(d(&[&[1.0], &[1.0]]));
        let m = d(&[&[1.0], &[3.0]]);
        assert_eq!(
            a.slice_contract(Axis::Col, 0, &m, &mut c).unwrap(),
            vec![4.0]
        );
    }

    #[test]
    fn slice_contract_out_of_range() {
        let a = Matrix::Dense(DenseMatrix::identity(2));
        let m = DenseMatrix::identity(2);
        let mut c = KernelCounters::new();
        assert!(matches!(
            a.slice_contract(Axis::Row, 2, &m, &mut c),
            Err(MatrixError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn rank_one_examples() {
        let mut c = KernelCounters::new();
        let mut m = DenseMatrix::zeros(2, 2);
        m.rank_one_accumulate(&[0.0, 1.0], &[2.0, 2.0], 1.0, RankOneTarget::Full, &mut c)
            .unwrap();
        assert_eq!(m, d(&[&[0.0, 0.0], &[2.0, 2.0]]));

        // zero scale leaves the matrix (and counters) untouched
        let before = c;
        let snapshot = m.clone();
        m.rank_one_accumulate(&[1.0, 1.0], &[1.0, 1.0], 0.0, RankOneTarget::Full, &mut c)
            .unwrap();
        assert_eq!(m, snapshot);
        assert_eq!(c, before);

        let mut m = DenseMatrix::identity(2);
        m.rank_one_accumulate(&[1.0, 0.0], &[1.0, 0.0], -1.0, RankOneTarget::Full, &mut c)
            .unwrap();
        assert_eq!(m, d(&[&[0.0, 0.0], &[0.0, 1.0]]));
    }

    #[test]
    fn rank_one_single_slices() {
        let mut c = KernelCounters::new();
        let mut m = DenseMatrix::zeros(2, 3);
        m.rank_one_accumulate(&[], &[1.0, 2.0, 3.0], 2.0, RankOneTarget::Row(1), &mut c)
            .unwrap();
        assert_eq!(m.row(1), &[2.0, 4.0, 6.0]);
        assert_eq!(c.fma, 3);
        m.rank_one_accumulate(&[1.0, 1.0], &[], -1.0, RankOneTarget::Col(0), &mut c)
            .unwrap();
        assert_eq!(m.get(0, 0), -1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(c.fma, 5);
    }

    #[test]
    fn rank_one_dimension_mismatch() {
        let mut c = KernelCounters::new();
        let mut m = DenseMatrix::zeros(2, 2);
        assert!(m
            .rank_one_accumulate(&[1.0], &[1.0, 1.0], 1.0, RankOneTarget::Full, &mut c)
            .is_err());
    }

    #[test]
    fn sparse_counter_bound() {
        // 3x3 with 4 stored entries; contraction of a 2-entry row against a
        // 3-column dense matrix must cost at most 2*3 fmas.
        let s = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (2, 0, 4.0), (2, 2, 0.5)],
        )
        .unwrap();
        assert_eq!(s.nnz(), 5);
        let a = Matrix::Sparse(s);
        let m = d(&[&[1.0; 3], &[2.0; 3], &[3.0; 3]]);
        let mut c = KernelCounters::new();
        let out = a.slice_contract(Axis::Row, 0, &m, &mut c).unwrap();
        assert_eq!(out, vec![7.0, 7.0, 7.0]);
        assert!(c.fma <= 2 * 3);
    }

    #[test]
    fn sparse_rejects_zero_slices() {
        let r = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(matches!(
            r,
            Err(MatrixError::ZeroSlice {
                axis: Axis::Col,
                index: 1
            })
        ));
        // cancellation creates a zero row
        let r = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 0, -1.0), (1, 0, 1.0), (1, 1, 1.0)],
        );
        assert!(matches!(
            r,
            Err(MatrixError::ZeroSlice {
                axis: Axis::Row,
                index: 0
            })
        ));
    }

    #[test]
    fn sparse_duplicates_summed() {
        let s =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (0, 1, 1.0)])
                .unwrap();
        assert_eq!(s.to_dense(), d(&[&[3.0, 1.0], &[0.0, 1.0]]));
    }

    #[test]
    fn contract_right_matches_transposed_contract() {
        // m * A[:,j] computed directly vs via dense algebra
        let a = Matrix::Dense(d(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]));
        let x = d(&[&[1.0, 0.0, 2.0], &[0.0, 1.0, 1.0]]);
        let mut c = KernelCounters::new();
        let got = a
            .slice_contract_right(&x, Axis::Col, 1, &mut c)
            .unwrap();
        // x * [2,4,6]^T = [2+12, 4+6] = [14, 10]
        assert_eq!(got, vec![14.0, 10.0]);

        let got = a.slice_contract_right(&x, Axis::Row, 2, &mut c);
        assert!(got.is_err()); // x has 3 cols, A row slice has 2 entries
    }

    fn small_matrix() -> impl Strategy<Value = DenseMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-10.0f64..10.0, r * c)
                .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn fro_equals_axis_norm_sums(m in small_matrix()) {
            let f = m.frobenius_sq();
            if let Ok(rows) = m.axis_sq_norms(Axis::Row) {
                let s: f64 = rows.iter().sum();
                prop_assert!((f - s).abs() <= 1e-12 * f.max(1.0));
            }
            if let Ok(cols) = m.axis_sq_norms(Axis::Col) {
                let s: f64 = cols.iter().sum();
                prop_assert!((f - s).abs() <= 1e-12 * f.max(1.0));
            }
        }

        #[test]
        fn rank_one_roundtrip(m in small_matrix(), s in -4.0f64..4.0) {
            let u: Vec<f64> = (0..m.rows()).map(|i| (i as f64) * 0.7 - 1.0).collect();
            let v: Vec<f64> = (0..m.cols()).map(|j| (j as f64) * 0.3 + 0.5).collect();
            let mut c = KernelCounters::new();
            let mut w = m.clone();
            w.rank_one_accumulate(&u, &v, s, RankOneTarget::Full, &mut c).unwrap();
            w.rank_one_accumulate(&u, &v, -s, RankOneTarget::Full, &mut c).unwrap();
            for (a, b) in w.data().iter().zip(m.data()) {
                prop_assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn sparse_dense_roundtrip(m in small_matrix()) {
            // force at least one nonzero in every row/column
            let mut m = m;
            for i in 0..m.rows() {
                if m.row(i).iter().all(|&v| v == 0.0) {
                    m.set(i, 0, 1.0);
                }
            }
            for j in 0..m.cols() {
                if (0..m.rows()).all(|i| m.get(i, j) == 0.0) {
                    m.set(0, j, 1.0);
                }
            }
            let s = SparseMatrix::from_dense(&m).unwrap();
            prop_assert_eq!(s.to_dense(), m);
        }
    }
}

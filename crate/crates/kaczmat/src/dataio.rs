//! Problem ingestion and trace persistence: a Matrix Market reader and
//! writer for sparse coefficients, synthetic Gaussian problem
//! generators, and CSV emission of convergence traces.

use crate::matrix::{DenseMatrix, Matrix, MatrixError, SparseMatrix};
use crate::oracle::{self, OracleError};
use crate::sampling::RngState;
use crate::solvers::{Consistency, ProblemInstance, Side, SolveError, SolveReport};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug)]
pub enum DataError {
    /// Malformed Matrix Market content; carries a line number when one
    /// is known.
    Parse { line: usize, message: String },
    /// The parsed matrix has all-zero rows and/or columns (0-based
    /// indices), which the solvers reject; the caller can excise them
    /// or reject the file.
    ZeroSlices { rows: Vec<usize>, cols: Vec<usize> },
    /// Invalid synthetic problem specification.
    Spec(String),
    Io(io::Error),
    Matrix(MatrixError),
    Oracle(OracleError),
    Solve(SolveError),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            DataError::ZeroSlices { rows, cols } => write!(
                f,
                "matrix has all-zero slices (rows {rows:?}, columns {cols:?})"
            ),
            DataError::Spec(msg) => write!(f, "invalid synthetic spec: {msg}"),
            DataError::Io(e) => write!(f, "io error: {e}"),
            DataError::Matrix(e) => write!(f, "{e}"),
            DataError::Oracle(e) => write!(f, "{e}"),
            DataError::Solve(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DataError {}

impl From<io::Error> for DataError {
    fn from(e: io::Error) -> Self {
        DataError::Io(e)
    }
}

impl From<MatrixError> for DataError {
    fn from(e: MatrixError) -> Self {
        DataError::Matrix(e)
    }
}

impl From<OracleError> for DataError {
    fn from(e: OracleError) -> Self {
        DataError::Oracle(e)
    }
}

impl From<SolveError> for DataError {
    fn from(e: SolveError) -> Self {
        DataError::Solve(e)
    }
}

/// Reads a Matrix Market stream. Supported headers are
/// `matrix coordinate real general` (plus `integer` values and the
/// `symmetric` qualifier, which is expanded to general storage) and
/// `matrix array real general`. Indices are 1-based in the file;
/// duplicate coordinate entries are summed; `%` comment lines are
/// skipped.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix, DataError> {
    let mut lines = reader.lines().enumerate();

    let (header_no, header) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (no + 1, line);
                }
            }
            None => {
                return Err(DataError::Parse {
                    line: 0,
                    message: "empty stream".into(),
                })
            }
        }
    };

    let fields: Vec<String> = header
        .trim()
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    let parse_err = |line: usize, message: &str| DataError::Parse {
        line,
        message: message.into(),
    };
    if fields.len() != 5 || fields[0] != "%%matrixmarket" {
        return Err(parse_err(
            header_no,
            "header must be %%MatrixMarket matrix <format> <field> <symmetry>",
        ));
    }
    if fields[1] != "matrix" {
        return Err(parse_err(header_no, "only the matrix object is supported"));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => {
            return Err(DataError::Parse {
                line: header_no,
                message: format!("unsupported format {other:?}"),
            })
        }
    };
    match fields[3].as_str() {
        "real" | "integer" => {}
        other => {
            return Err(DataError::Parse {
                line: header_no,
                message: format!("unsupported field {other:?} (real-valued data only)"),
            })
        }
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(DataError::Parse {
                line: header_no,
                message: format!("unsupported symmetry {other:?}"),
            })
        }
    };

    // size line: first non-comment, non-blank line after the header
    let (size_no, size_line) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                break (no + 1, line);
            }
            None => return Err(parse_err(header_no, "missing size line")),
        }
    };
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    let expected_dims = if coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(DataError::Parse {
            line: size_no,
            message: format!("size line must have {expected_dims} fields"),
        });
    }
    let parse_usize = |s: &str, no: usize| -> Result<usize, DataError> {
        s.parse::<usize>().map_err(|_| DataError::Parse {
            line: no,
            message: format!("invalid integer {s:?}"),
        })
    };
    let rows = parse_usize(dims[0], size_no)?;
    let cols = parse_usize(dims[1], size_no)?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_no, "dimensions must be positive"));
    }
    if symmetric && rows != cols {
        return Err(parse_err(size_no, "symmetric matrix must be square"));
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    if coordinate {
        let nnz = parse_usize(dims[2], size_no)?;
        let mut seen = 0usize;
        while seen < nnz {
            let (no, line) = match lines.next() {
                Some((no, line)) => (no + 1, line?),
                None => {
                    return Err(DataError::Parse {
                        line: size_no,
                        message: format!("expected {nnz} entries, found {seen}"),
                    })
                }
            };
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(no, "coordinate entry must be `i j value`"));
            }
            let i = parse_usize(parts[0], no)?;
            let j = parse_usize(parts[1], no)?;
            let v: f64 = parts[2].parse().map_err(|_| DataError::Parse {
                line: no,
                message: format!("invalid value {:?}", parts[2]),
            })?;
            if i == 0 || i > rows || j == 0 || j > cols {
                return Err(DataError::Parse {
                    line: no,
                    message: format!("coordinate ({i}, {j}) outside {rows}x{cols} (1-based)"),
                });
            }
            triplets.push((i - 1, j - 1, v));
            if symmetric && i != j {
                triplets.push((j - 1, i - 1, v));
            }
            seen += 1;
        }
    } else {
        // array format: dense column-major listing
        let total = rows * cols;
        let mut seen = 0usize;
        while seen < total {
            let (no, line) = match lines.next() {
                Some((no, line)) => (no + 1, line?),
                None => {
                    return Err(DataError::Parse {
                        line: size_no,
                        message: format!("expected {total} array values, found {seen}"),
                    })
                }
            };
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            for tok in t.split_whitespace() {
                if seen >= total {
                    return Err(parse_err(no, "more array values than rows*cols"));
                }
                let v: f64 = tok.parse().map_err(|_| DataError::Parse {
                    line: no,
                    message: format!("invalid value {tok:?}"),
                })?;
                let i = seen % rows;
                let j = seen / rows;
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
                seen += 1;
            }
        }
    }

    // report every empty slice up front so the caller can excise them
    let mut row_seen = vec![false; rows];
    let mut col_seen = vec![false; cols];
    let mut sums = std::collections::BTreeMap::new();
    for &(i, j, v) in &triplets {
        *sums.entry((i, j)).or_insert(0.0) += v;
    }
    for (&(i, j), &v) in &sums {
        if v != 0.0 {
            row_seen[i] = true;
            col_seen[j] = true;
        }
    }
    let empty_rows: Vec<usize> = (0..rows).filter(|&i| !row_seen[i]).collect();
    let empty_cols: Vec<usize> = (0..cols).filter(|&j| !col_seen[j]).collect();
    if !empty_rows.is_empty() || !empty_cols.is_empty() {
        return Err(DataError::ZeroSlices {
            rows: empty_rows,
            cols: empty_cols,
        });
    }

    Ok(SparseMatrix::from_triplets(rows, cols, &triplets)?)
}

pub fn read_matrix_market_path<P: AsRef<Path>>(path: P) -> Result<SparseMatrix, DataError> {
    let file = File::open(path)?;
    read_matrix_market(BufReader::new(file))
}

/// Writes `coordinate real general` Matrix Market. Values use the
/// shortest decimal representation that round-trips `f64` exactly.
pub fn write_matrix_market<W: Write>(m: &SparseMatrix, mut w: W) -> Result<(), DataError> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Rank structure of a synthetic Gaussian coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    /// `A = randn(m, n)`: full rank almost surely.
    Full,
    /// `A = [A0, A0]` with `A0 = randn(m, n/2)`: column rank `n/2`.
    HalfCols,
    /// `A = [A0; A0]` with `A0 = randn(m/2, n)`: row rank `m/2`.
    HalfRows,
}

impl fmt::Display for RankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RankMode::Full => "full",
            RankMode::HalfCols => "half-cols",
            RankMode::HalfRows => "half-rows",
        };
        write!(f, "{s}")
    }
}

/// Parameters of a synthetic Gaussian instance: the coefficient is
/// standard normal (with optional duplicated block structure for rank
/// deficiency), the generating solution is standard normal, and
/// inconsistent instances add `noise_scale * randn` to the right-hand
/// side.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub rank_mode: RankMode,
    pub consistency: Consistency,
    pub noise_scale: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn consistent(m: usize, n: usize, p: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            p,
            rank_mode: RankMode::Full,
            consistency: Consistency::Consistent,
            noise_scale: 0.0,
            seed,
        }
    }

    pub fn inconsistent(m: usize, n: usize, p: usize, noise_scale: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            p,
            rank_mode: RankMode::Full,
            consistency: Consistency::Inconsistent,
            noise_scale,
            seed,
        }
    }

    pub fn with_rank_mode(mut self, mode: RankMode) -> Self {
        self.rank_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.m == 0 || self.n == 0 || self.p == 0 {
            return Err(DataError::Spec("dimensions must be positive".into()));
        }
        match self.rank_mode {
            RankMode::HalfCols if self.n % 2 != 0 => {
                return Err(DataError::Spec("half-cols requires even n".into()))
            }
            RankMode::HalfRows if self.m % 2 != 0 => {
                return Err(DataError::Spec("half-rows requires even m".into()))
            }
            _ => {}
        }
        match self.consistency {
            Consistency::Consistent if self.noise_scale != 0.0 => Err(DataError::Spec(
                "consistent instances take noise_scale = 0".into(),
            )),
            Consistency::Inconsistent if !(self.noise_scale > 0.0) => Err(DataError::Spec(
                "inconsistent instances need noise_scale > 0".into(),
            )),
            Consistency::Unknown => Err(DataError::Spec(
                "synthetic consistency must be declared".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// A generated instance together with the random matrix that produced
/// its right-hand side. For inconsistent (or rank-deficient) instances
/// the generator differs from the instance's `known_solution`, which is
/// always the minimal-norm least-squares solution the methods converge
/// to.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub instance: ProblemInstance,
    pub generator_solution: DenseMatrix,
}

fn randn_matrix(rng: &mut RngState, rows: usize, cols: usize) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.standard_normal()).collect();
    DenseMatrix::new(rows, cols, data).expect("gaussian draws are finite")
}

fn synth_coefficient(spec: &SyntheticSpec, rng: &mut RngState) -> DenseMatrix {
    match spec.rank_mode {
        RankMode::Full => randn_matrix(rng, spec.m, spec.n),
        RankMode::HalfCols => {
            let half = randn_matrix(rng, spec.m, spec.n / 2);
            let mut a = DenseMatrix::zeros(spec.m, spec.n);
            for i in 0..spec.m {
                for j in 0..spec.n / 2 {
                    let v = half.get(i, j);
                    a.set(i, j, v);
                    a.set(i, j + spec.n / 2, v);
                }
            }
            a
        }
        RankMode::HalfRows => {
            let half = randn_matrix(rng, spec.m / 2, spec.n);
            let mut a = DenseMatrix::zeros(spec.m, spec.n);
            for i in 0..spec.m / 2 {
                for j in 0..spec.n {
                    let v = half.get(i, j);
                    a.set(i, j, v);
                    a.set(i + spec.m / 2, j, v);
                }
            }
            a
        }
    }
}

/// Generates a synthetic instance for the given equation side. Draw
/// order (coefficient, then generator solution, then noise) is fixed,
/// so identical spec and seed give bit-identical instances.
///
/// The `known_solution` is the generator itself exactly when the
/// construction makes the generator recoverable (full-rank coefficient
/// with unique solution); otherwise it is the oracle's minimal-norm
/// least-squares solution, which is what every method converges to.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    side: Side,
) -> Result<SyntheticInstance, DataError> {
    spec.validate()?;
    let mut rng = RngState::new(spec.seed);
    let a = synth_coefficient(spec, &mut rng);
    let generator = match side {
        Side::AxB => randn_matrix(&mut rng, spec.n, spec.p),
        Side::XaC => randn_matrix(&mut rng, spec.p, spec.m),
    };
    let mut rhs = match side {
        Side::AxB => a.matmul(&generator)?,
        Side::XaC => generator.matmul(&a)?,
    };
    if spec.consistency == Consistency::Inconsistent {
        let noise = randn_matrix(&mut rng, rhs.rows(), rhs.cols());
        rhs = rhs.add(&noise.scaled(spec.noise_scale))?;
    }

    let generator_recoverable = spec.consistency == Consistency::Consistent
        && spec.rank_mode == RankMode::Full
        && match side {
            Side::AxB => spec.m >= spec.n,
            Side::XaC => spec.n >= spec.m,
        };
    let known = if generator_recoverable {
        generator.clone()
    } else {
        oracle::min_norm_solution(&a, &rhs, side)?
    };

    let instance = ProblemInstance::new(side, Matrix::Dense(a), rhs)?
        .with_known_solution(known)?
        .with_consistency(spec.consistency);
    Ok(SyntheticInstance {
        instance,
        generator_solution: generator,
    })
}

/// Writes a convergence trace as CSV with header
/// `iteration,metric,seconds`. Metric and seconds use 17 significant
/// digits so re-parsing reproduces the exact `f64` values.
pub fn write_trace<W: Write>(report: &SolveReport, mut w: W) -> Result<(), DataError> {
    writeln!(w, "iteration,metric,seconds")?;
    for t in &report.trace {
        writeln!(w, "{},{:.16e},{:.16e}", t.iteration, t.metric, t.seconds)?;
    }
    Ok(())
}

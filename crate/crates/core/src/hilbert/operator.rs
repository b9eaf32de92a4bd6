use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::power::{estimate_norm, NormEstimate, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use super::Vector;
use crate::error::{check_dim, Error, Result};

/// Inflation applied to power-iteration estimates before they are used as a
/// certified upper bound on `|L|`.
pub const DEFAULT_NORM_SAFETY: f64 = 1.0 + 1e-8;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        check_dim("matrix data", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim("matrix row", cols, r.len())?;
            data.extend_from_slice(r);
        }
        DenseMatrix::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DenseMatrix::new(n, n, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        DenseMatrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        DenseMatrix::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn mul_vec(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.rows, |i| {
            self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum()
        })
    }

    fn mul_transpose_vec(&self, y: &Vector) -> Vector {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Vector::new(out)
    }

    /// Parses the plain-text format: a header line `rows cols` followed by
    /// `rows * cols` whitespace-separated decimals in row-major order.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("bad matrix header {header:?}: {e}")))?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse(format!(
                "matrix header must be `rows cols`, got {header:?}"
            )));
        };
        let data: Vec<f64> = lines
            .flat_map(str::split_whitespace)
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad entry {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if data.len() != rows * cols {
            return Err(Error::Parse(format!(
                "expected {} entries for a {rows}x{cols} matrix, found {}",
                rows * cols,
                data.len()
            )));
        }
        DenseMatrix::new(rows, cols, data)
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        DenseMatrix::parse_text(&std::fs::read_to_string(path)?)
    }

    /// Serializes to the text format with round-trip precision.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }
}

/// Structure of a linear operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OperatorKind {
    Dense(DenseMatrix),
    /// `(Dx)_i = x_{i+1} - x_i`, mapping `R^n -> R^{n-1}`.
    ForwardDifference { n: usize },
}

/// Bounded linear map `L: H -> G` together with a certified upper bound on
/// its operator norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearOperator {
    kind: OperatorKind,
    norm_bound: f64,
}

impl LinearOperator {
    /// Wraps a dense matrix; the norm bound is a power-iteration estimate
    /// inflated by [`DEFAULT_NORM_SAFETY`].
    pub fn dense(matrix: DenseMatrix) -> Self {
        Self::dense_with_safety(matrix, DEFAULT_NORM_SAFETY)
    }

    pub fn dense_with_safety(matrix: DenseMatrix, safety: f64) -> Self {
        let mut op = LinearOperator {
            kind: OperatorKind::Dense(matrix),
            norm_bound: 0.0,
        };
        let est = estimate_norm(&op, DEFAULT_TOL, DEFAULT_MAX_ITERS)
            .expect("default tolerance is positive");
        op.norm_bound = est.value * safety;
        op
    }

    /// Uses a caller-supplied bound, e.g. an exact norm of a structured operator.
    pub fn with_norm_bound(kind: OperatorKind, norm_bound: f64) -> Result<Self> {
        if !(norm_bound >= 0.0 && norm_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "norm bound must be finite and nonnegative, got {norm_bound}"
            )));
        }
        if let OperatorKind::ForwardDifference { n } = kind {
            if n < 2 {
                return Err(Error::InvalidArgument(
                    "forward difference needs n >= 2".into(),
                ));
            }
        }
        Ok(LinearOperator { kind, norm_bound })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::with_norm_bound(OperatorKind::Dense(DenseMatrix::identity(n)?), 1.0)
    }

    /// Forward differences on `R^n` with the analytic bound `|D| <= 2`.
    pub fn forward_difference(n: usize) -> Result<Self> {
        Self::with_norm_bound(OperatorKind::ForwardDifference { n }, 2.0)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Dimension of the codomain `G`.
    pub fn rows(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(m) => m.rows(),
            OperatorKind::ForwardDifference { n } => n - 1,
        }
    }

    /// Dimension of the domain `H`.
    pub fn cols(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(m) => m.cols(),
            OperatorKind::ForwardDifference { n } => *n,
        }
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim("operator apply", self.cols(), x.len())?;
        Ok(match &self.kind {
            OperatorKind::Dense(m) => m.mul_vec(x),
            OperatorKind::ForwardDifference { n } => {
                Vector::from_fn(n - 1, |i| x[i + 1] - x[i])
            }
        })
    }

    pub fn apply_adjoint(&self, y: &Vector) -> Result<Vector> {
        check_dim("operator adjoint", self.rows(), y.len())?;
        Ok(match &self.kind {
            OperatorKind::Dense(m) => m.mul_transpose_vec(y),
            OperatorKind::ForwardDifference { n } => {
                let m = n - 1;
                Vector::from_fn(*n, |j| {
                    let left = if j >= 1 { y[j - 1] } else { 0.0 };
                    let right = if j < m { y[j] } else { 0.0 };
                    left - right
                })
            }
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.kind {
            OperatorKind::Dense(m) => m.clone(),
            OperatorKind::ForwardDifference { .. } => {
                let (rows, cols) = (self.rows(), self.cols());
                let mut data = vec![0.0; rows * cols];
                for i in 0..rows {
                    data[i * cols + i] = -1.0;
                    data[i * cols + i + 1] = 1.0;
                }
                DenseMatrix::new(rows, cols, data).expect("valid shape")
            }
        }
    }

    /// Fresh power-iteration estimate of `|L|` (not the stored bound).
    pub fn estimate_norm(&self) -> NormEstimate {
        estimate_norm(self, DEFAULT_TOL, DEFAULT_MAX_ITERS).expect("default tolerance is positive")
    }
}

/// Applies `L` to `x`.
pub fn apply(op: &LinearOperator, x: &Vector) -> Result<Vector> {
    op.apply(x)
}

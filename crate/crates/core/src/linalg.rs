//! Dense complex matrices and the checks the rest of the crate builds on.
//!
//! Tensor products follow the little-endian index split used throughout the
//! crate: `(A ⊗ B)[i1 + A.rows·i2, j1 + A.cols·j2] = A[i1, j1]·B[i2, j2]`.
//! The first factor therefore acts on the least significant digit, which is
//! the reverse of the block layout produced by most numerical libraries.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Largest row (or column) count allowed for an explicitly materialized matrix.
pub const MAX_EXPLICIT_DIM: usize = 4096;

/// Default absolute tolerance for [`validate_walsh`].
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("entries length {len} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("result of {rows}x{cols} exceeds the explicit matrix limit of {limit}")]
    SizeOverflow { rows: usize, cols: usize, limit: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix size {0} is too small, need N >= 2")]
    TooSmall(usize),
    #[error("first row is not constant 1/sqrt(N) (max deviation {max_dev:.3e})")]
    FirstRowNotConstant { max_dev: f64 },
    #[error("matrix is not unitary (max |AA* - I| = {max_dev:.3e})")]
    NotUnitary { max_dev: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("tensor power must be at least 1")]
    ZeroPower,
}

/// Row-major dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch { rows, cols, len: data.len() });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` over entries; `f64::INFINITY` when shapes differ.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `‖A·A* − I‖_max`; `f64::INFINITY` for non-square input.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.rows {
                let dot: Complex64 = self.row(r).iter().zip(self.row(c)).map(|(a, b)| a * b.conj()).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    /// Submatrix formed by the listed rows and columns, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

/// A validated generator: an `N×N` unitary matrix whose first row is `1/√N`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalshMatrix {
    matrix: ComplexMatrix,
    tol: f64,
}

impl WalshMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Tolerance the matrix was validated at.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }
}

/// Tensor product under the little-endian index split.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    match (rows, cols) {
        (Some(rows), Some(cols)) if rows <= MAX_EXPLICIT_DIM && cols <= MAX_EXPLICIT_DIM => {
            Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
                let (i1, i2) = (r % a.rows, r / a.rows);
                let (j1, j2) = (c % a.cols, c / a.cols);
                a[(i1, j1)] * b[(i2, j2)]
            }))
        }
        (rows, cols) => Err(LinalgError::SizeOverflow {
            rows: rows.unwrap_or(usize::MAX),
            cols: cols.unwrap_or(usize::MAX),
            limit: MAX_EXPLICIT_DIM,
        }),
    }
}

/// `A^{⊗p} = A ⊗ A^{⊗(p−1)}`, materialized. Only meant for small sizes.
pub fn kron_power(a: &ComplexMatrix, p: usize) -> Result<ComplexMatrix, LinalgError> {
    if p == 0 {
        return Err(LinalgError::ZeroPower);
    }
    let mut acc = a.clone();
    for _ in 1..p {
        acc = kron(a, &acc)?;
    }
    Ok(acc)
}

/// Check that `matrix` is square, at least 2×2, has constant first row
/// `1/√N` and is unitary, all within the absolute tolerance `tol`.
pub fn validate_walsh(matrix: ComplexMatrix, tol: f64) -> Result<WalshMatrix, LinalgError> {
    if !matrix.is_square() {
        return Err(LinalgError::NotSquare { rows: matrix.rows, cols: matrix.cols });
    }
    let n = matrix.rows;
    if n < 2 {
        return Err(LinalgError::TooSmall(n));
    }
    let target = 1.0 / (n as f64).sqrt();
    let row_dev = matrix.row(0).iter().map(|z| (z - target).norm()).fold(0.0, f64::max);
    if row_dev > tol {
        return Err(LinalgError::FirstRowNotConstant { max_dev: row_dev });
    }
    let unit_dev = matrix.unitarity_deviation();
    if unit_dev > tol {
        return Err(LinalgError::NotUnitary { max_dev: unit_dev });
    }
    Ok(WalshMatrix { matrix, tol })
}

/// True iff every entry has modulus `1/√N` within `tol`, i.e. `√N·A` is Hadamard.
pub fn is_hadamard_scaled(a: &WalshMatrix, tol: f64) -> bool {
    let target = 1.0 / (a.n() as f64).sqrt();
    a.matrix.as_slice().iter().all(|z| (z.norm() - target).abs() <= tol)
}

/// Rank via Gaussian elimination with complete pivoting. Pivots at or below
/// `tol` times the largest entry modulus are treated as zero.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    let scale = m.max_abs();
    if rows == 0 || cols == 0 || scale == 0.0 {
        return 0;
    }
    let threshold = tol * scale;
    let mut w = m.data.clone();
    let mut rank = 0;
    while rank < rows.min(cols) {
        let (mut pr, mut pc, mut best) = (rank, rank, 0.0);
        for r in rank..rows {
            for c in rank..cols {
                let v = w[r * cols + c].norm();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= threshold {
            break;
        }
        if pr != rank {
            for c in 0..cols {
                w.swap(pr * cols + c, rank * cols + c);
            }
        }
        if pc != rank {
            for r in 0..rows {
                w.swap(r * cols + pc, r * cols + rank);
            }
        }
        let pivot = w[rank * cols + rank];
        for r in rank + 1..rows {
            let factor = w[r * cols + rank] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in rank..cols {
                let sub = factor * w[rank * cols + c];
                w[r * cols + c] -= sub;
            }
        }
        rank += 1;
    }
    rank
}

/// A nonzero vector `v` with `m·v ≈ 0`, or `None` when the columns are
/// independent at relative tolerance `tol`. The returned vector has unit norm.
pub fn null_vector(m: &ComplexMatrix, tol: f64) -> Option<Vec<Complex64>> {
    let (rows, cols) = (m.rows, m.cols);
    if cols == 0 {
        return None;
    }
    let scale = m.max_abs();
    if rows == 0 || scale == 0.0 {
        let mut v = vec![Complex64::new(0.0, 0.0); cols];
        v[0] = Complex64::new(1.0, 0.0);
        return Some(v);
    }
    let threshold = tol * scale;
    // Row reduction with partial pivoting, tracking pivot columns.
    let mut w = m.data.clone();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == rows {
            break;
        }
        let (pr, best) = (row..rows)
            .map(|r| (r, w[r * cols + c].norm()))
            .fold((row, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= threshold {
            continue;
        }
        for k in 0..cols {
            w.swap(pr * cols + k, row * cols + k);
        }
        let pivot = w[row * cols + c];
        for k in 0..cols {
            w[row * cols + k] /= pivot;
        }
        for r in 0..rows {
            if r == row {
                continue;
            }
            let factor = w[r * cols + c];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..cols {
                let sub = factor * w[row * cols + k];
                w[r * cols + k] -= sub;
            }
        }
        pivot_cols.push(c);
        row += 1;
    }
    let free = (0..cols).find(|c| !pivot_cols.contains(c))?;
    let mut v = vec![Complex64::new(0.0, 0.0); cols];
    v[free] = Complex64::new(1.0, 0.0);
    for (r, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -w[r * cols + free];
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Some(v.into_iter().map(|z| z / norm).collect())
}

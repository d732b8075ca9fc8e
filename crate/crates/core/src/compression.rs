//! Variance-criterion compression: transform, keep the `m` components with
//! the largest squared magnitude, zero the rest, and transform back.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, WalshMatrix};
use crate::transform::{Direction, TransformError, TransformPlan};

pub use crate::fixtures::dct_matrix;

/// Default relative tolerance for the `‖Tx‖ = ‖x‖` check.
pub const DEFAULT_ORTHO_TOL: f64 = 1e-8;
/// Largest imaginary part tolerated when reconstructing a real signal.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompressionError {
    #[error("transform is not orthogonal on this input (relative norm change {deviation:.3e})")]
    NotOrthogonal { deviation: f64 },
    #[error("keep count {m} out of range 1..={len}")]
    OutOfRange { m: usize, len: usize },
    #[error("signal is zero")]
    ZeroSignal,
    #[error("signal length {got} does not match transform length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("reconstruction has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// An (approximately) orthogonal map together with its inverse.
pub trait OrthogonalTransform {
    fn name(&self) -> &str;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>, CompressionError>;
    fn inverse(&self, y: &[Complex64]) -> Result<Vec<Complex64>, CompressionError>;
    /// Relative tolerance on `|‖Tx‖ − ‖x‖|/‖x‖`.
    fn ortho_tol(&self) -> f64 {
        DEFAULT_ORTHO_TOL
    }
}

/// Explicit matrix; the inverse is the adjoint.
#[derive(Clone, Debug)]
pub struct DenseTransform {
    name: String,
    matrix: ComplexMatrix,
    adjoint: ComplexMatrix,
}

impl DenseTransform {
    pub fn new(name: impl Into<String>, matrix: ComplexMatrix) -> Self {
        let adjoint = matrix.adjoint();
        Self { name: name.into(), matrix, adjoint }
    }

    pub fn dct(n: usize) -> Self {
        Self::new("dct", dct_matrix(n))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), CompressionError> {
    if expected == got {
        Ok(())
    } else {
        Err(CompressionError::LengthMismatch { expected, got })
    }
}

impl OrthogonalTransform for DenseTransform {
    fn name(&self) -> &str {
        &self.name
    }

    fn len(&self) -> usize {
        self.matrix.rows()
    }

    fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>, CompressionError> {
        check_len(self.matrix.cols(), x.len())?;
        Ok(self.matrix.matvec(x).expect("length checked"))
    }

    fn inverse(&self, y: &[Complex64]) -> Result<Vec<Complex64>, CompressionError> {
        check_len(self.adjoint.cols(), y.len())?;
        Ok(self.adjoint.matvec(y).expect("length checked"))
    }
}

/// Generalized Walsh transform through the fast factorized plan.
#[derive(Clone, Debug)]
pub struct WalshTransform {
    name: String,
    plan: TransformPlan,
}

impl WalshTransform {
    pub fn new(name: impl Into<String>, generator: &WalshMatrix, p: usize) -> Result<Self, CompressionError> {
        Ok(Self { name: name.into(), plan: TransformPlan::new(generator, p, Direction::Analysis)? })
    }
}

impl OrthogonalTransform for WalshTransform {
    fn name(&self) -> &str {
        &self.name
    }

    fn len(&self) -> usize {
        self.plan.len()
    }

    fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>, CompressionError> {
        Ok(self.plan.forward(x)?)
    }

    fn inverse(&self, y: &[Complex64]) -> Result<Vec<Complex64>, CompressionError> {
        Ok(self.plan.inverse(y)?.into_values())
    }

    /// The generator's validation tolerance, which bounds how far an
    /// approximately unitary generator may bend norms.
    fn ortho_tol(&self) -> f64 {
        DEFAULT_ORTHO_TOL.max(self.plan.generator().tol())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub index: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionReport {
    pub transform_name: String,
    pub kept: usize,
    /// Kept component indices, in decreasing order of variance.
    pub kept_indices: Vec<usize>,
    /// Full normalized variance distribution, decreasing.
    pub variance_curve: Vec<CurvePoint>,
    /// Squared Euclidean error `‖X − X̃‖²`.
    pub error: f64,
    /// Sum of the squared magnitudes of the discarded components.
    pub discarded_energy: f64,
}

impl CompressionReport {
    /// Root-mean-square error `sqrt(error / n)`.
    pub fn rmse(&self) -> f64 {
        (self.error / self.variance_curve.len() as f64).sqrt()
    }
}

/// Sorted normalized variances `|y_i|²/Σ|y_j|²`, descending, ties by lower index.
pub fn variance_curve(y: &[Complex64]) -> Result<Vec<CurvePoint>, CompressionError> {
    let total: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return Err(CompressionError::ZeroSignal);
    }
    let mut points: Vec<CurvePoint> =
        y.iter().enumerate().map(|(index, z)| CurvePoint { index, fraction: z.norm_sqr() / total }).collect();
    points.sort_by(|a, b| b.fraction.total_cmp(&a.fraction).then(a.index.cmp(&b.index)));
    Ok(points)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Compress the real signal `x` keeping `m` components and return the
/// report together with the reconstruction.
pub fn compress(
    transform: &dyn OrthogonalTransform,
    x: &[f64],
    m: usize,
) -> Result<(CompressionReport, Vec<f64>), CompressionError> {
    let len = x.len();
    if m == 0 || m > len {
        return Err(CompressionError::OutOfRange { m, len });
    }
    check_len(transform.len(), len)?;
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let y = transform.forward(&xc)?;
    let (nx, ny) = (norm(&xc), norm(&y));
    if nx == 0.0 {
        return Err(CompressionError::ZeroSignal);
    }
    let deviation = (ny - nx).abs() / nx;
    if deviation > transform.ortho_tol() {
        return Err(CompressionError::NotOrthogonal { deviation });
    }
    let curve = variance_curve(&y)?;
    let kept_indices: Vec<usize> = curve[..m].iter().map(|p| p.index).collect();
    let mut truncated = vec![Complex64::new(0.0, 0.0); len];
    for &i in &kept_indices {
        truncated[i] = y[i];
    }
    let discarded_energy = curve[m..].iter().map(|p| y[p.index].norm_sqr()).sum();
    let back = transform.inverse(&truncated)?;
    let residue = back.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > IMAG_RESIDUE_TOL * nx.max(1.0) {
        return Err(CompressionError::ImaginaryResidue(residue));
    }
    let reconstruction: Vec<f64> = back.iter().map(|z| z.re).collect();
    let error = x.iter().zip(&reconstruction).map(|(a, b)| (a - b).powi(2)).sum();
    let report = CompressionReport {
        transform_name: transform.name().to_string(),
        kept: m,
        kept_indices,
        variance_curve: curve,
        error,
        discarded_energy,
    };
    Ok((report, reconstruction))
}

/// Orthogonal matrix whose first row is `x/‖x‖`, completed by Gram–Schmidt
/// over the standard basis. Since `xxᵗ` has rank one, this diagonalizes it.
pub fn kl_transform(x: &[f64]) -> Result<DenseTransform, CompressionError> {
    let n = x.len();
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 {
        return Err(CompressionError::ZeroSignal);
    }
    let mut rows: Vec<Vec<f64>> = vec![x.iter().map(|v| v / nx).collect()];
    for e in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for r in &rows {
                let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi -= dot * ri;
                }
            }
        }
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len < 1e-6 {
            continue;
        }
        rows.push(v.into_iter().map(|a| a / len).collect());
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let matrix = ComplexMatrix::from_real(n, n, &flat).expect("n rows of length n");
    Ok(DenseTransform::new("kl", matrix))
}

/// High-variation test signal: for 1-based `i`, `i/(3i+1)` when 9 divides
/// `i`, otherwise `i/(i+1)`.
pub fn example_signal(len: usize) -> Vec<f64> {
    (1..=len)
        .map(|i| {
            let fi = i as f64;
            if i % 9 == 0 {
                fi / (3.0 * fi + 1.0)
            } else {
                fi / (fi + 1.0)
            }
        })
        .collect()
}

/// Number of components kept when a fraction `remove` of `len` is zeroed.
pub fn kept_after_removing(len: usize, remove: f64) -> usize {
    len - (remove * len as f64).round() as usize
}

//! Fast generalized Walsh transform.
//!
//! `Ā^{⊗p}` factors as `∏_{k=0}^{p−1} (I_{N^k} ⊗ Ā ⊗ I_{N^{p−1−k}})`, and each
//! factor only mixes the `N` entries that differ in digit `k`. Applying the
//! `p` sparse stages costs `N^p·p·N` multiply-adds instead of `N^{2p}`.
//!
//! [`TransformPlan::forward`] returns the unitary vector `Ā^{⊗p}f`. The L²
//! coefficients `⟨f, W_n⟩` of the step function `f` differ from it by the
//! factor `N^{−p/2}`; see [`scale_to_l2`].

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{checked_pow, GridSignal};
use crate::linalg::{kron_power, ComplexMatrix, LinalgError, WalshMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("{base}^{resolution} overflows usize")]
    Overflow { base: usize, resolution: usize },
    #[error("vector length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("stage {stage} out of range for {stages} stages")]
    StageOutOfRange { stage: usize, stages: usize },
    #[error("kernel must be square, got {rows}x{cols}")]
    KernelNotSquare { rows: usize, cols: usize },
    #[error("generator sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Apply `Ā^{⊗p}`.
    Analysis,
    /// Apply `(Aᵀ)^{⊗p}`, the inverse of analysis.
    Synthesis,
}

/// Precomputed `p`-stage transform for a fixed generator and resolution.
///
/// Only the two `N×N` kernels are stored; nothing of size `N^p`.
#[derive(Clone, Debug)]
pub struct TransformPlan {
    generator: WalshMatrix,
    resolution: usize,
    len: usize,
    direction: Direction,
    kernel: ComplexMatrix,
    adjoint: ComplexMatrix,
}

impl TransformPlan {
    pub fn new(generator: &WalshMatrix, resolution: usize, direction: Direction) -> Result<Self, TransformError> {
        let analysis = generator.matrix().conj();
        let synthesis = generator.matrix().transpose();
        let (kernel, adjoint) = match direction {
            Direction::Analysis => (analysis, synthesis),
            Direction::Synthesis => (synthesis, analysis),
        };
        Self::build(generator.clone(), resolution, direction, kernel, adjoint)
    }

    fn build(
        generator: WalshMatrix,
        resolution: usize,
        direction: Direction,
        kernel: ComplexMatrix,
        adjoint: ComplexMatrix,
    ) -> Result<Self, TransformError> {
        if resolution == 0 {
            return Err(TransformError::ZeroResolution);
        }
        let len = checked_pow(generator.n(), resolution)
            .ok_or(TransformError::Overflow { base: generator.n(), resolution })?;
        Ok(Self { generator, resolution, len, direction, kernel, adjoint })
    }

    pub fn generator(&self) -> &WalshMatrix {
        &self.generator
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn stage_count(&self) -> usize {
        self.resolution
    }

    /// Signal length `N^p`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Kernel applied at every stage in the plan's direction.
    pub fn kernel(&self) -> &ComplexMatrix {
        &self.kernel
    }

    /// Apply the plan in its own direction.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
        match self.direction {
            Direction::Analysis => run_stages(&self.kernel, self.resolution, v, StageOrder::Descending),
            Direction::Synthesis => run_stages(&self.kernel, self.resolution, v, StageOrder::Ascending),
        }
    }

    /// Apply the inverse of [`apply`](Self::apply).
    pub fn apply_inverse(&self, v: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
        match self.direction {
            Direction::Analysis => run_stages(&self.adjoint, self.resolution, v, StageOrder::Ascending),
            Direction::Synthesis => run_stages(&self.adjoint, self.resolution, v, StageOrder::Descending),
        }
    }

    /// Analysis transform `Ā^{⊗p}·f`, whatever the plan's direction.
    pub fn forward(&self, f: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
        match self.direction {
            Direction::Analysis => self.apply(f),
            Direction::Synthesis => self.apply_inverse(f),
        }
    }

    /// Synthesis `(Aᵀ)^{⊗p}·c`, returning the grid signal whose analysis is `c`.
    pub fn inverse(&self, c: &[Complex64]) -> Result<GridSignal, TransformError> {
        let values = match self.direction {
            Direction::Analysis => self.apply_inverse(c)?,
            Direction::Synthesis => self.apply(c)?,
        };
        Ok(GridSignal::new(self.generator.n(), self.resolution, values).expect("length checked by stages"))
    }

    pub fn forward_signal(&self, f: &GridSignal) -> Result<Vec<Complex64>, TransformError> {
        self.forward(f.values())
    }
}

#[derive(Clone, Copy)]
enum StageOrder {
    Ascending,
    Descending,
}

fn run_stages(
    kernel: &ComplexMatrix,
    resolution: usize,
    v: &[Complex64],
    order: StageOrder,
) -> Result<Vec<Complex64>, TransformError> {
    let n = kernel.rows();
    let len = checked_pow(n, resolution).ok_or(TransformError::Overflow { base: n, resolution })?;
    if v.len() != len {
        return Err(TransformError::LengthMismatch { expected: len, got: v.len() });
    }
    let mut current = v.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); len];
    let mut step = |k: usize| {
        stage_into(kernel, k, &current, &mut scratch);
        std::mem::swap(&mut current, &mut scratch);
    };
    match order {
        StageOrder::Descending => (0..resolution).rev().for_each(&mut step),
        StageOrder::Ascending => (0..resolution).for_each(&mut step),
    }
    Ok(current)
}

/// One stage `out = (I_{N^k} ⊗ K ⊗ I_{N^{p−1−k}})·input`, i.e.
/// `out[i1 + N^k·i2 + N^{k+1}·i3] = Σ_{j2} K[i2, j2]·input[i1 + N^k·j2 + N^{k+1}·i3]`.
///
/// The sum over `j2` always runs in ascending order.
fn stage_into(kernel: &ComplexMatrix, k: usize, input: &[Complex64], out: &mut [Complex64]) {
    let n = kernel.rows();
    let stride = n.pow(k as u32);
    let block = stride * n;
    let zero = Complex64::new(0.0, 0.0);
    for (src, dst) in input.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        for i2 in 0..n {
            let row = kernel.row(i2);
            let dst_run = &mut dst[i2 * stride..(i2 + 1) * stride];
            dst_run.fill(zero);
            for (j2, &coef) in row.iter().enumerate() {
                let src_run = &src[j2 * stride..(j2 + 1) * stride];
                for (d, s) in dst_run.iter_mut().zip(src_run) {
                    *d += coef * s;
                }
            }
        }
    }
}

/// Apply a single stage `k` of a `p`-stage transform with the given `N×N`
/// kernel to a vector of length `N^p`, out of place.
pub fn stage_apply(kernel: &ComplexMatrix, k: usize, v: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
    if !kernel.is_square() {
        return Err(TransformError::KernelNotSquare { rows: kernel.rows(), cols: kernel.cols() });
    }
    let n = kernel.rows();
    let mut resolution = 0;
    let mut len = 1usize;
    while len < v.len() {
        len = len.saturating_mul(n);
        resolution += 1;
    }
    if n < 2 || len != v.len() || v.is_empty() {
        return Err(TransformError::LengthMismatch { expected: len, got: v.len() });
    }
    if k >= resolution {
        return Err(TransformError::StageOutOfRange { stage: k, stages: resolution });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    stage_into(kernel, k, v, &mut out);
    Ok(out)
}

/// `Ā^{⊗p}·f` by explicit materialization of the tensor power. Test oracle.
pub fn forward_naive(a: &WalshMatrix, p: usize, f: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
    let big = kron_power(&a.matrix().conj(), p)?;
    Ok(big.matvec(f)?)
}

/// `(Aᵀ)^{⊗p}·c` by explicit materialization. Test oracle for the inverse.
pub fn inverse_naive(a: &WalshMatrix, p: usize, c: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
    let big = kron_power(&a.matrix().transpose(), p)?;
    Ok(big.matvec(c)?)
}

/// Fast change of basis between the analysis coefficients of two generators.
///
/// Each stage applies `conj(B·A*)`, so that `change_basis(forward_A(f)) = forward_B(f)`.
#[derive(Clone, Debug)]
pub struct ChangeOfBasis {
    plan: TransformPlan,
}

impl ChangeOfBasis {
    pub fn new(from: &WalshMatrix, to: &WalshMatrix, p: usize) -> Result<Self, TransformError> {
        if from.n() != to.n() {
            return Err(TransformError::SizeMismatch(from.n(), to.n()));
        }
        let kernel = to.matrix().matmul(&from.matrix().adjoint())?.conj();
        let adjoint = kernel.adjoint();
        let plan = TransformPlan::build(from.clone(), p, Direction::Analysis, kernel, adjoint)?;
        Ok(Self { plan })
    }

    pub fn kernel(&self) -> &ComplexMatrix {
        self.plan.kernel()
    }

    pub fn apply(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
        self.plan.apply(coeffs)
    }
}

pub fn change_basis(
    a: &WalshMatrix,
    b: &WalshMatrix,
    p: usize,
    coeffs_a: &[Complex64],
) -> Result<Vec<Complex64>, TransformError> {
    ChangeOfBasis::new(a, b, p)?.apply(coeffs_a)
}

/// Operation count `N^p·p·N` of the fast transform (saturating).
pub fn op_count(n: usize, p: usize) -> u128 {
    let mut m: u128 = 1;
    for _ in 0..p {
        m = m.saturating_mul(n as u128);
    }
    m.saturating_mul(p as u128).saturating_mul(n as u128)
}

/// Multiply unitary coefficients by `N^{−p/2}`, giving L² inner products
/// `⟨f, W_n⟩` for the step function `f`.
pub fn scale_to_l2(coeffs: &[Complex64], n: usize, p: usize) -> Vec<Complex64> {
    let factor = (n as f64).powf(-(p as f64) / 2.0);
    coeffs.iter().map(|z| z * factor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{gw3a, gw3b, walsh2, GW3B_TOL};
    use crate::linalg::{kron, validate_walsh};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn dirac(len: usize, j: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0); len];
        v[j] = c(1.0);
        v
    }

    #[test]
    fn single_stage_is_matvec() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let plan = TransformPlan::new(&h, 1, Direction::Analysis).unwrap();
        let v = vec![c(0.3), Complex64::new(-1.0, 2.0)];
        let expect = h.matrix().matvec(&v).unwrap();
        assert!(max_diff(&plan.forward(&v).unwrap(), &expect) < 1e-15);
        assert_eq!(TransformPlan::new(&h, 6, Direction::Analysis).unwrap().stage_count(), 6);
        assert_eq!(TransformPlan::new(&h, 0, Direction::Analysis).unwrap_err(), TransformError::ZeroResolution);
    }

    #[test]
    fn stage_examples() {
        let h = walsh2();
        let v: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        for k in 0..3 {
            assert_eq!(stage_apply(&ComplexMatrix::identity(2), k, &v).unwrap(), v);
        }
        let v2 = vec![c(1.0), c(2.0)];
        assert_eq!(stage_apply(&h, 0, &v2).unwrap(), h.matvec(&v2).unwrap());
        let out = stage_apply(&h, 1, &dirac(4, 0)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!(max_diff(&out, &[c(s), c(0.0), c(s), c(0.0)]) < 1e-15);
        // Stage 1 of p = 2 is I_2 ⊗ H in the little-endian convention.
        let explicit = kron(&ComplexMatrix::identity(2), &h).unwrap();
        let w: Vec<Complex64> = (0..4).map(|k| c(k as f64 + 1.0)).collect();
        assert!(max_diff(&stage_apply(&h, 1, &w).unwrap(), &explicit.matvec(&w).unwrap()) < 1e-14);
        let explicit0 = kron(&h, &ComplexMatrix::identity(2)).unwrap();
        assert!(max_diff(&stage_apply(&h, 0, &w).unwrap(), &explicit0.matvec(&w).unwrap()) < 1e-14);
        assert!(matches!(stage_apply(&h, 2, &w), Err(TransformError::StageOutOfRange { .. })));
        assert!(matches!(stage_apply(&h, 0, &w[..3]), Err(TransformError::LengthMismatch { .. })));
    }

    #[test]
    fn constant_maps_to_scaled_dirac() {
        for (m, p) in [(walsh2(), 3), (gw3a(), 2)] {
            let a = validate_walsh(m, 1e-12).unwrap();
            let plan = TransformPlan::new(&a, p, Direction::Analysis).unwrap();
            let ones = vec![c(1.0); plan.len()];
            let mut expect = vec![c(0.0); plan.len()];
            expect[0] = c((plan.len() as f64).sqrt());
            assert!(max_diff(&plan.forward(&ones).unwrap(), &expect) < 1e-12);
            assert!(max_diff(&forward_naive(&a, p, &ones).unwrap(), &expect) < 1e-12);
            assert!(max_diff(plan.inverse(&expect).unwrap().values(), &ones) < 1e-12);
        }
    }

    #[test]
    fn gw3a_two_stages_match_oracle() {
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let plan = TransformPlan::new(&a, 2, Direction::Analysis).unwrap();
        let f: Vec<Complex64> = (0..9).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let ca = gw3a().conj();
        let oracle = kron(&ca, &ca).unwrap().matvec(&f).unwrap();
        assert!(max_diff(&plan.forward(&f).unwrap(), &oracle) < 1e-12);
        assert!(max_diff(&plan.inverse(&oracle).unwrap().into_values(), &f) < 1e-12);
        assert!(max_diff(&inverse_naive(&a, 2, &oracle).unwrap(), &f) < 1e-12);
    }

    #[test]
    fn synthesis_plan_is_inverse_of_analysis() {
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let syn = TransformPlan::new(&a, 3, Direction::Synthesis).unwrap();
        let ana = TransformPlan::new(&a, 3, Direction::Analysis).unwrap();
        let f: Vec<Complex64> = (0..27).map(|k| c(k as f64 * 0.1 - 1.0)).collect();
        assert!(max_diff(&syn.forward(&f).unwrap(), &ana.forward(&f).unwrap()) < 1e-14);
        assert!(max_diff(&syn.apply(&ana.apply(&f).unwrap()).unwrap(), &f) < 1e-12);
    }

    #[test]
    fn change_basis_examples() {
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let b = validate_walsh(gw3b(), GW3B_TOL).unwrap();
        let f: Vec<Complex64> = (0..9).map(|k| c(((k * 7) % 5) as f64 - 2.0)).collect();
        let same = change_basis(&a, &a, 2, &f).unwrap();
        assert!(max_diff(&same, &f) < 1e-12);
        let fa = TransformPlan::new(&a, 2, Direction::Analysis).unwrap().forward(&f).unwrap();
        let fb = TransformPlan::new(&b, 2, Direction::Analysis).unwrap().forward(&f).unwrap();
        assert!(max_diff(&change_basis(&a, &b, 2, &fa).unwrap(), &fb) < 1e-8);
        // Matrix of the map equals conj(BA*) ⊗ conj(BA*).
        let k = gw3b().matmul(&gw3a().adjoint()).unwrap().conj();
        let oracle = kron(&k, &k).unwrap();
        let cob = ChangeOfBasis::new(&a, &b, 2).unwrap();
        for j in 0..9 {
            let col = cob.apply(&dirac(9, j)).unwrap();
            assert!(max_diff(&col, &oracle.column(j)) < 1e-14);
        }
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        assert_eq!(change_basis(&a, &h, 1, &f[..3]).unwrap_err(), TransformError::SizeMismatch(3, 2));
    }

    #[test]
    fn op_counts() {
        assert_eq!(op_count(2, 1), 4);
        assert_eq!(op_count(2, 10), 20480);
        for (n, p) in [(2, 5), (3, 4), (4, 6)] {
            assert_eq!(op_count(n, p) / (n as u128).pow(p as u32), (n * p) as u128);
        }
    }

    #[test]
    fn l2_scaling_matches_grid_inner_product() {
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let f = GridSignal::from_real(3, 2, &[1.0, 0.5, -2.0, 0.0, 3.0, 1.0, 1.0, -1.0, 0.25]).unwrap();
        let plan = TransformPlan::new(&a, 2, Direction::Analysis).unwrap();
        let l2 = scale_to_l2(&plan.forward_signal(&f).unwrap(), 3, 2);
        for (n, coeff) in l2.iter().enumerate() {
            let w = crate::basis::walsh_grid_vector(&a, n, 2).unwrap();
            assert!((f.grid_inner(&w).unwrap() - coeff).norm() < 1e-12);
        }
    }
}

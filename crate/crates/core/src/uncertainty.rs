//! Support sizes, the α exponent, uncertainty bounds and the brute-force
//! uncertainty constant `μ(A) = min_{f≠0} |supp f|·|supp Af|`.

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::GridSignal;
use crate::linalg::{is_hadamard_scaled, kron_power, null_vector, numerical_rank, ComplexMatrix, LinalgError, WalshMatrix};
use crate::transform::{Direction, TransformError, TransformPlan};

/// Default size limit for [`mu_bruteforce`].
pub const MU_BRUTE_FORCE_LIMIT: usize = 12;

/// Relative zero threshold used by [`support_relative`].
pub const DEFAULT_SUPPORT_RTOL: f64 = 1e-9;

/// Relative pivot threshold for the rank tests inside the μ search.
const RANK_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UncertaintyError {
    #[error("signal is zero")]
    ZeroSignal,
    #[error("matrix of size {size} exceeds the brute-force limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("matrix is not unitary within {tol:e} (deviation {dev:.3e})")]
    NotUnitary { tol: f64, dev: f64 },
    #[error("matrix is not square")]
    NotSquare,
    #[error("sqrt(N)·A is not a Hadamard matrix")]
    NotHadamard,
    #[error("exhaustive minor check is limited to N <= 8, got {0}")]
    CombinatorialOverflow(usize),
    #[error("need N1·N2 < N with N1, N2 >= 1 (N1 = {n1}, N2 = {n2}, N = {n})")]
    InvalidMinorShape { n1: usize, n2: usize, n: usize },
    #[error("signal base {signal} does not match generator size {generator}")]
    BaseMismatch { signal: usize, generator: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Sorted indices with `|v[i]| > tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet {
    pub indices: Vec<usize>,
    pub tol: f64,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn support(v: &[Complex64], tol: f64) -> SupportSet {
    let indices = v.iter().enumerate().filter(|(_, z)| z.norm() > tol).map(|(i, _)| i).collect();
    SupportSet { indices, tol }
}

/// Support with threshold `rtol·‖v‖∞`.
pub fn support_relative(v: &[Complex64], rtol: f64) -> SupportSet {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    support(v, rtol * scale)
}

/// α exponent and related constants of a generator.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyProfile {
    pub n: usize,
    /// `min(1, −2·log_N M)`.
    pub alpha: f64,
    /// `M = max |a_ij|`.
    pub max_entry: f64,
    pub hadamard: bool,
}

impl UncertaintyProfile {
    /// Lower bound `N^{pα}` on `|supp f|·|supp Tf|`.
    pub fn bound(&self, p: usize) -> f64 {
        (self.n as f64).powf(p as f64 * self.alpha)
    }
}

pub fn alpha_of(a: &WalshMatrix) -> UncertaintyProfile {
    let n = a.n();
    let max_entry = a.matrix().max_abs();
    let alpha = (-2.0 * max_entry.ln() / (n as f64).ln()).min(1.0);
    UncertaintyProfile { n, alpha, max_entry, hadamard: is_hadamard_scaled(a, a.tol().max(1e-12)) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyReport {
    pub support_f: usize,
    pub support_tf: usize,
    pub product: usize,
    pub bound: f64,
    pub holds: bool,
}

/// Compute `Tf = Ā^{⊗p}f` with the fast transform and compare
/// `|supp f|·|supp Tf|` against `N^{pα}`. Supports use the relative
/// threshold `tol·‖·‖∞`.
pub fn check_uncertainty(a: &WalshMatrix, p: usize, f: &GridSignal, tol: f64) -> Result<UncertaintyReport, UncertaintyError> {
    if f.base() != a.n() {
        return Err(UncertaintyError::BaseMismatch { signal: f.base(), generator: a.n() });
    }
    let sf = support_relative(f.values(), tol);
    if sf.is_empty() {
        return Err(UncertaintyError::ZeroSignal);
    }
    let plan = TransformPlan::new(a, p, Direction::Analysis)?;
    let tf = plan.forward(f.values())?;
    let stf = support_relative(&tf, tol);
    let product = sf.len() * stf.len();
    let bound = alpha_of(a).bound(p);
    Ok(UncertaintyReport {
        support_f: sf.len(),
        support_tf: stf.len(),
        product,
        bound,
        holds: product as f64 >= bound * (1.0 - 1e-12),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuResult {
    pub mu: usize,
    /// Column set `S` (support of the witness signal).
    pub support_f: Vec<usize>,
    /// Row set `T` containing the support of `A·f`.
    pub support_af: Vec<usize>,
    /// A nonzero signal supported in `S` whose image is supported in `T`.
    pub witness: Vec<Complex64>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..=n - (k - current.len()) {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut current, &mut out);
    }
    out
}

fn complement(set: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !set.contains(i)).collect()
}

/// Exact uncertainty constant of a unitary matrix by subset enumeration.
///
/// `μ = min{|S|·|T| : A[Tᶜ, S] has a nontrivial kernel}`. Products are
/// scanned in increasing order and the first feasible product is returned;
/// among pairs with that product the lexicographically smallest `(S, T)` wins.
pub fn mu_bruteforce(m: &ComplexMatrix, tol: f64) -> Result<MuResult, UncertaintyError> {
    mu_bruteforce_with_limit(m, tol, MU_BRUTE_FORCE_LIMIT)
}

pub fn mu_bruteforce_with_limit(m: &ComplexMatrix, tol: f64, limit: usize) -> Result<MuResult, UncertaintyError> {
    if !m.is_square() {
        return Err(UncertaintyError::NotSquare);
    }
    let n = m.rows();
    if n > limit {
        return Err(UncertaintyError::TooLarge { size: n, limit });
    }
    let dev = m.unitarity_deviation();
    if dev > tol {
        return Err(UncertaintyError::NotUnitary { tol, dev });
    }
    // A Dirac always gives |S| = 1, |T| <= n, so the search ends by product n.
    for product in 1..=n {
        let mut best: Option<(Vec<usize>, Vec<usize>, Vec<Complex64>)> = None;
        for s in (1..=n).filter(|s| product % s == 0) {
            let t = product / s;
            if t > n {
                continue;
            }
            let col_sets = combinations(n, s);
            let row_sets = combinations(n, t);
            for cols in &col_sets {
                if let Some((bs, _, _)) = &best {
                    if cols > bs {
                        break;
                    }
                }
                for rows in &row_sets {
                    let excluded = complement(rows, n);
                    let sub = m.select(&excluded, cols);
                    if numerical_rank(&sub, RANK_RTOL) < s {
                        let local = null_vector(&sub, RANK_RTOL).expect("rank-deficient submatrix has a kernel");
                        let mut witness = vec![Complex64::new(0.0, 0.0); n];
                        for (&c, v) in cols.iter().zip(local) {
                            witness[c] = v;
                        }
                        let candidate = (cols.clone(), rows.clone(), witness);
                        let better = match &best {
                            None => true,
                            Some((bs, bt, _)) => (&candidate.0, &candidate.1) < (bs, bt),
                        };
                        if better {
                            best = Some(candidate);
                        }
                        break;
                    }
                }
            }
        }
        if let Some((support_f, support_af, witness)) = best {
            return Ok(MuResult { mu: product, support_f, support_af, witness });
        }
    }
    unreachable!("a unitary matrix always admits a Dirac witness with product <= n")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuBounds {
    /// `1/M^{2p}`.
    pub lower: f64,
    /// `μ(A)^p`.
    pub upper: f64,
    pub mu_base: usize,
}

/// Bounds `1/M^{2p} ≤ μ(A^{⊗p}) ≤ μ(A)^p`.
pub fn mu_bounds(a: &WalshMatrix, p: usize) -> Result<MuBounds, UncertaintyError> {
    let mu = mu_bruteforce(a.matrix(), a.tol().max(1e-10))?;
    let max_entry = a.matrix().max_abs();
    Ok(MuBounds {
        lower: max_entry.powi(-2 * p as i32),
        upper: (mu.mu as f64).powi(p as i32),
        mu_base: mu.mu,
    })
}

/// μ of the explicit tensor power `A^{⊗p}`, when small enough for brute force.
pub fn mu_of_tensor_power(a: &WalshMatrix, p: usize) -> Result<MuResult, UncertaintyError> {
    let big = kron_power(a.matrix(), p)?;
    if big.rows() > MU_BRUTE_FORCE_LIMIT {
        return Err(UncertaintyError::TooLarge { size: big.rows(), limit: MU_BRUTE_FORCE_LIMIT });
    }
    // Unitarity error grows roughly linearly with the number of factors.
    mu_bruteforce(&big, a.tol().max(1e-10) * (p as f64 + 1.0))
}

/// For Hadamard `√N·A` and `N1·N2 < N`: every submatrix made of
/// `n = N − N2` rows and `N1` columns has full column rank `N1`.
/// Checked exhaustively over all row and column subsets.
pub fn hadamard_minor_rank(a: &WalshMatrix, n1: usize, n2: usize) -> Result<bool, UncertaintyError> {
    let n = a.n();
    if n > 8 {
        return Err(UncertaintyError::CombinatorialOverflow(n));
    }
    if !is_hadamard_scaled(a, a.tol().max(1e-12)) {
        return Err(UncertaintyError::NotHadamard);
    }
    if n1 == 0 || n2 == 0 || n1 * n2 >= n {
        return Err(UncertaintyError::InvalidMinorShape { n1, n2, n });
    }
    let scaled = a.matrix().scale((n as f64).sqrt());
    let rows = n - n2;
    for row_set in combinations(n, rows) {
        for col_set in combinations(n, n1) {
            if numerical_rank(&scaled.select(&row_set, &col_set), RANK_RTOL) != n1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fourier, gw3a, gw3b, gw4, walsh2, GW3B_TOL};
    use crate::linalg::{kron, validate_walsh};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn support_examples() {
        assert!(support(&[c(0.0); 4], 1e-12).is_empty());
        let mut d = vec![c(0.0); 8];
        d[3] = c(1.0);
        assert_eq!(support(&d, 1e-12).indices, vec![3]);
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let plan = TransformPlan::new(&h, 3, Direction::Analysis).unwrap();
        let mut d0 = vec![c(0.0); 8];
        d0[0] = c(1.0);
        assert_eq!(support_relative(&plan.forward(&d0).unwrap(), 1e-9).len(), 8);
    }

    #[test]
    fn alpha_examples() {
        let h = alpha_of(&validate_walsh(walsh2(), 1e-12).unwrap());
        assert!((h.alpha - 1.0).abs() < 1e-12);
        assert!(h.hadamard);
        let a = alpha_of(&validate_walsh(gw3a(), 1e-12).unwrap());
        assert!((a.max_entry - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((a.alpha - 0.369).abs() < 1e-3);
        assert!((a.bound(3) - 3.375).abs() < 1e-9);
        assert!(!a.hadamard);
    }

    #[test]
    fn hadamard_dirac_is_extremal() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        for j in 0..8 {
            let f = GridSignal::dirac(2, 3, j).unwrap();
            let r = check_uncertainty(&h, 3, &f, DEFAULT_SUPPORT_RTOL).unwrap();
            assert_eq!((r.support_f, r.support_tf, r.product), (1, 8, 8));
            assert!(r.holds);
        }
        let zero = GridSignal::constant(2, 3, c(0.0)).unwrap();
        assert_eq!(check_uncertainty(&h, 3, &zero, 1e-9), Err(UncertaintyError::ZeroSignal));
    }

    #[test]
    fn constant_signal_product() {
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let f = GridSignal::constant(3, 2, c(2.0)).unwrap();
        let r = check_uncertainty(&a, 2, &f, DEFAULT_SUPPORT_RTOL).unwrap();
        assert_eq!((r.support_f, r.support_tf), (9, 1));
        assert!(r.holds);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_bruteforce(&ComplexMatrix::identity(4), 1e-12).unwrap().mu, 1);
        assert_eq!(mu_bruteforce(&walsh2(), 1e-12).unwrap().mu, 2);
        let a = mu_bruteforce(&gw3a(), 1e-12).unwrap();
        assert_eq!(a.mu, 2);
        // Column 0 of gw3a has a zero in row 1.
        assert_eq!((a.support_f.clone(), a.support_af.clone()), (vec![0], vec![0, 2]));
        assert_eq!(mu_bruteforce(&gw3b(), GW3B_TOL).unwrap().mu, 3);
        assert_eq!(mu_bruteforce(&fourier(5), 1e-12).unwrap().mu, 5);
        assert_eq!(mu_bruteforce(&gw4(), 1e-12).unwrap().mu, 2);
    }

    #[test]
    fn mu_witness_realizes_product() {
        for m in [walsh2(), gw3a(), gw4(), kron(&walsh2(), &walsh2()).unwrap()] {
            let r = mu_bruteforce(&m, 1e-12).unwrap();
            let image = m.matvec(&r.witness).unwrap();
            let sf = support_relative(&r.witness, 1e-9).len();
            let saf = support_relative(&image, 1e-9).len();
            assert!(sf * saf <= r.mu);
            assert!(sf * saf >= 1);
        }
    }

    #[test]
    fn mu_rejects_bad_input() {
        let big = ComplexMatrix::identity(13);
        assert!(matches!(mu_bruteforce(&big, 1e-12), Err(UncertaintyError::TooLarge { .. })));
        assert!(matches!(mu_bruteforce(&gw3b(), 1e-12), Err(UncertaintyError::NotUnitary { .. })));
        assert_eq!(mu_bruteforce(&ComplexMatrix::zeros(2, 3), 1e-12), Err(UncertaintyError::NotSquare));
    }

    #[test]
    fn bounds_examples() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let b = mu_bounds(&h, 3).unwrap();
        assert!((b.lower - 8.0).abs() < 1e-9);
        assert_eq!(b.upper, 8.0);
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let b = mu_bounds(&a, 2).unwrap();
        assert_eq!(b.upper, 4.0);
        assert!((b.lower - 2.25).abs() < 1e-9);
        let b1 = mu_bounds(&a, 1).unwrap();
        assert!(b1.lower <= b1.mu_base as f64 && b1.mu_base as f64 <= b1.upper);
    }

    #[test]
    fn minor_rank_examples() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        assert!(hadamard_minor_rank(&h, 1, 1).unwrap());
        let hh = validate_walsh(kron(&walsh2(), &walsh2()).unwrap(), 1e-12).unwrap();
        assert!(hadamard_minor_rank(&hh, 1, 2).unwrap());
        assert!(hadamard_minor_rank(&hh, 2, 1).unwrap());
        assert!(matches!(hadamard_minor_rank(&hh, 2, 2), Err(UncertaintyError::InvalidMinorShape { .. })));
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        assert_eq!(hadamard_minor_rank(&a, 1, 1), Err(UncertaintyError::NotHadamard));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}

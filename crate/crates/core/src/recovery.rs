//! Recovery of sparse signals from a transform with some coefficients erased.
//!
//! Given the observed coefficients `Tf` on a frequency set `B` and a bound
//! `nf` on `|supp f|`, [`recover`] enumerates every support of size at most
//! `nf`, fits the observed data in the least-squares sense on each, and keeps
//! the best fit. When `2·nf·nw < N^{pα}` (with `nw = |Bᶜ|`), the uncertainty
//! bound makes the exact fit unique.

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{checked_pow, digit_product, GridSignal};
use crate::linalg::WalshMatrix;
use crate::transform::{Direction, TransformError, TransformPlan};
use crate::uncertainty::{support_relative, UncertaintyProfile, DEFAULT_SUPPORT_RTOL};

/// Largest signal length searched without restriction on `nf`.
pub const RECOVERY_BRUTE_FORCE_LIMIT: usize = 64;
/// Largest `nf` allowed for signals longer than [`RECOVERY_BRUTE_FORCE_LIMIT`].
pub const RECOVERY_MAX_NF_LARGE: usize = 3;
/// Residual gap separating a unique minimizer from the runner-up.
pub const DEFAULT_TIE_TOL: f64 = 1e-7;

/// Relative pivot threshold in the normal equations.
const PIVOT_RTOL: f64 = 1e-10;
/// Two candidate signals closer than this (max-abs) count as the same signal.
const SAME_SIGNAL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoveryError {
    #[error("search over length {len} with nf = {nf} is too large")]
    TooLarge { len: usize, nf: usize },
    #[error("no support of size <= {nf} fits the observations (best residual {best:.3e})")]
    Infeasible { nf: usize, best: f64 },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("coefficient vector length {got} does not match {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("declared sparsity must be at least 1")]
    ZeroSparsity,
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Transform coefficients with the frequencies outside `observed` zeroed.
#[derive(Clone, Debug)]
pub struct PuncturedSpectrum {
    coeffs: Vec<Complex64>,
    observed: Vec<usize>,
    nf: usize,
    generator: WalshMatrix,
    resolution: usize,
}

impl PuncturedSpectrum {
    /// Assemble from already-punctured data. Entries outside `observed` are zeroed.
    pub fn new(
        generator: &WalshMatrix,
        resolution: usize,
        coeffs: Vec<Complex64>,
        observed: &[usize],
        nf: usize,
    ) -> Result<Self, RecoveryError> {
        let len = checked_pow(generator.n(), resolution)
            .ok_or(TransformError::Overflow { base: generator.n(), resolution })?;
        if coeffs.len() != len {
            return Err(RecoveryError::LengthMismatch { expected: len, got: coeffs.len() });
        }
        let mut mask = vec![false; len];
        for &k in observed {
            if k >= len {
                return Err(RecoveryError::IndexOutOfRange { index: k, len });
            }
            mask[k] = true;
        }
        let observed: Vec<usize> = (0..len).filter(|&k| mask[k]).collect();
        let coeffs = coeffs
            .into_iter()
            .zip(&mask)
            .map(|(z, &keep)| if keep { z } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(Self { coeffs, observed, nf, generator: generator.clone(), resolution })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Observed frequency set `B`, sorted.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn nf(&self) -> usize {
        self.nf
    }

    /// Number of unobserved frequencies `N^p − |B|`.
    pub fn nw(&self) -> usize {
        self.coeffs.len() - self.observed.len()
    }

    pub fn generator(&self) -> &WalshMatrix {
        &self.generator
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }
}

/// Transform `f`, erase the listed frequencies and record `nf = |supp f|`.
pub fn puncture(a: &WalshMatrix, p: usize, f: &GridSignal, erase: &[usize]) -> Result<PuncturedSpectrum, RecoveryError> {
    let plan = TransformPlan::new(a, p, Direction::Analysis)?;
    let tf = plan.forward(f.values())?;
    let len = tf.len();
    let mut keep = vec![true; len];
    for &k in erase {
        if k >= len {
            return Err(RecoveryError::IndexOutOfRange { index: k, len });
        }
        keep[k] = false;
    }
    let observed: Vec<usize> = (0..len).filter(|&k| keep[k]).collect();
    let nf = support_relative(f.values(), DEFAULT_SUPPORT_RTOL).len();
    PuncturedSpectrum::new(a, p, tf, &observed, nf)
}

/// `2·nf·nw < N^{pα}`. A product equal to the bound up to rounding fails.
pub fn uniqueness_ok(nf: usize, nw: usize, profile: &UncertaintyProfile, p: usize) -> bool {
    ((2 * nf * nw) as f64) < profile.bound(p) * (1.0 - 1e-12)
}

#[derive(Clone, Debug)]
pub struct Recovery {
    pub signal: GridSignal,
    /// `‖(Ā^{⊗p})[B, S]·v − f̃[B]‖₂` at the minimizer.
    pub residual: f64,
    /// Support searched by the minimizer.
    pub support: Vec<usize>,
    /// No other signal with support size `≤ nf` comes within the tie tolerance.
    pub unique: bool,
}

struct Fit {
    support: Vec<usize>,
    values: Vec<Complex64>,
    residual: f64,
    rank_deficient: bool,
}

/// Least squares via normal equations with complete pivoting. Free
/// variables of a rank-deficient system are set to zero.
fn least_squares(columns: &[&[Complex64]], rhs: &[Complex64]) -> (Vec<Complex64>, bool) {
    let k = columns.len();
    let mut g = vec![Complex64::new(0.0, 0.0); k * (k + 1)];
    for i in 0..k {
        for j in 0..k {
            g[i * (k + 1) + j] = columns[i].iter().zip(columns[j]).map(|(a, b)| a.conj() * b).sum();
        }
        g[i * (k + 1) + k] = columns[i].iter().zip(rhs).map(|(a, b)| a.conj() * b).sum();
    }
    let w = k + 1;
    let scale = (0..k).map(|i| g[i * w + i].norm()).fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rank = 0;
    while rank < k {
        let (mut pr, mut pc, mut best) = (rank, rank, 0.0);
        for r in rank..k {
            for c in rank..k {
                let v = g[r * w + c].norm();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= PIVOT_RTOL * scale || best == 0.0 {
            break;
        }
        for c in 0..w {
            g.swap(pr * w + c, rank * w + c);
        }
        for r in 0..k {
            g.swap(r * w + pc, r * w + rank);
        }
        perm.swap(pc, rank);
        let pivot = g[rank * w + rank];
        for r in rank + 1..k {
            let factor = g[r * w + rank] / pivot;
            for c in rank..w {
                let sub = factor * g[rank * w + c];
                g[r * w + c] -= sub;
            }
        }
        rank += 1;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    for r in (0..rank).rev() {
        let mut acc = g[r * w + k];
        for c in r + 1..rank {
            acc -= g[r * w + c] * x[c];
        }
        x[r] = acc / g[r * w + r];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    for (pos, &var) in perm.iter().enumerate() {
        out[var] = x[pos];
    }
    (out, rank < k)
}

fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solve `min ‖v‖-sparse fit` over all supports with `|S| ≤ nf`.
///
/// Among candidates within `tol` of the smallest residual, the one with the
/// smallest support (then lexicographically smallest) is returned. `unique` is false when another
/// candidate signal within `tol` of the best residual differs from it, or
/// when the best support leaves a kernel on the observed rows.
pub fn recover(ps: &PuncturedSpectrum, tol: f64) -> Result<Recovery, RecoveryError> {
    let a = &ps.generator;
    let p = ps.resolution;
    let len = ps.coeffs.len();
    let nf = ps.nf;
    if nf == 0 {
        return Err(RecoveryError::ZeroSparsity);
    }
    if len > RECOVERY_BRUTE_FORCE_LIMIT && nf > RECOVERY_MAX_NF_LARGE {
        return Err(RecoveryError::TooLarge { len, nf });
    }
    let observed = &ps.observed;
    let rhs: Vec<Complex64> = observed.iter().map(|&k| ps.coeffs[k]).collect();
    // Column j of Ā^{⊗p} restricted to the observed rows.
    let columns: Vec<Vec<Complex64>> = (0..len)
        .map(|j| observed.iter().map(|&row| digit_product(a, row, j, p).conj()).collect())
        .collect();
    let rhs_norm = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut fits: Vec<Fit> = Vec::new();
    if rhs_norm <= tol {
        fits.push(Fit { support: Vec::new(), values: Vec::new(), residual: rhs_norm, rank_deficient: false });
    }
    for size in 1..=nf.min(len) {
        for_each_subset(len, size, |support| {
            let cols: Vec<&[Complex64]> = support.iter().map(|&j| columns[j].as_slice()).collect();
            let (values, rank_deficient) = least_squares(&cols, &rhs);
            let mut r2 = 0.0;
            for (row, target) in rhs.iter().enumerate() {
                let fitted: Complex64 = cols.iter().zip(&values).map(|(col, v)| col[row] * v).sum();
                r2 += (fitted - target).norm_sqr();
            }
            fits.push(Fit { support: support.to_vec(), values, residual: r2.sqrt(), rank_deficient });
        });
    }
    let min_residual = fits.iter().map(|f| f.residual).fold(f64::INFINITY, f64::min);
    let best_idx = (0..fits.len())
        .filter(|&i| fits[i].residual <= min_residual + tol)
        .min_by(|&i, &j| (fits[i].support.len(), &fits[i].support).cmp(&(fits[j].support.len(), &fits[j].support)))
        .expect("at least one candidate");
    let best = &fits[best_idx];
    let signal_of = |fit: &Fit| {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        for (&j, &x) in fit.support.iter().zip(&fit.values) {
            v[j] = x;
        }
        v
    };
    let best_signal = signal_of(best);
    let mut unique = !best.rank_deficient;
    for (i, fit) in fits.iter().enumerate() {
        if !unique {
            break;
        }
        if i == best_idx || fit.residual > best.residual + tol {
            continue;
        }
        let other = signal_of(fit);
        let diff = other.iter().zip(&best_signal).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if diff > SAME_SIGNAL_TOL || fit.rank_deficient {
            unique = false;
        }
    }
    let profile = crate::uncertainty::alpha_of(a);
    if best.residual > tol && uniqueness_ok(nf, ps.nw(), &profile, p) {
        return Err(RecoveryError::Infeasible { nf, best: best.residual });
    }
    Ok(Recovery {
        signal: GridSignal::new(a.n(), p, best_signal).expect("length N^p"),
        residual: best.residual,
        support: best.support.clone(),
        unique,
    })
}

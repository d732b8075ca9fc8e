//! Base-N digit words, filters, generalized Walsh functions and the
//! finite-resolution Cuntz isometries.
//!
//! A grid signal at resolution `p` is a vector of length `N^p` holding a step
//! function on the cells of width `N^{-p}`. The cell index of a point `x`
//! with base-N digits `x = 0.x_1 x_2 …` is `x_1 + N·x_2 + … + N^{p−1}·x_p`,
//! so digit words are least-significant first throughout and the coarsest
//! digit of `x` is the least significant digit of its index. Listing the
//! cells left to right permutes indices by base-N digit reversal; see
//! [`reverse_digits`].

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::WalshMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("value {value} out of range for base {base} with {len} digits")]
    OutOfRange { value: usize, base: usize, len: usize },
    #[error("digit {digit} is not valid in base {base}")]
    InvalidDigit { digit: usize, base: usize },
    #[error("row index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point {0} is outside [0, 1)")]
    PointOutOfDomain(f64),
    #[error("signal length {len} does not equal {base}^{resolution}")]
    LengthMismatch { len: usize, base: usize, resolution: usize },
    #[error("base {base} and resolution {resolution} overflow usize")]
    Overflow { base: usize, resolution: usize },
    #[error("generator size {generator} does not match signal base {signal}")]
    BaseMismatch { generator: usize, signal: usize },
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

pub(crate) fn grid_len(base: usize, resolution: usize) -> Result<usize, BasisError> {
    checked_pow(base, resolution).ok_or(BasisError::Overflow { base, resolution })
}

/// Fixed-length base-N digit string, least-significant digit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitWord {
    base: usize,
    digits: Vec<usize>,
}

impl DigitWord {
    pub fn new(base: usize, digits: Vec<usize>) -> Result<Self, BasisError> {
        if let Some(&digit) = digits.iter().find(|&&d| d >= base) {
            return Err(BasisError::InvalidDigit { digit, base });
        }
        Ok(Self { base, digits })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn value(&self) -> usize {
        from_digits(self)
    }

    /// Digits in most-significant-first order, for display.
    pub fn most_significant_first(&self) -> Vec<usize> {
        self.digits.iter().rev().copied().collect()
    }
}

impl std::fmt::Display for DigitWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn to_digits(n: usize, base: usize, len: usize) -> Result<DigitWord, BasisError> {
    let out_of_range = BasisError::OutOfRange { value: n, base, len };
    if base < 2 {
        return Err(out_of_range);
    }
    match checked_pow(base, len) {
        Some(limit) if n < limit => {}
        // base^len overflowing usize means every n fits.
        None => {}
        _ => return Err(out_of_range),
    }
    let mut rest = n;
    let digits = (0..len)
        .map(|_| {
            let d = rest % base;
            rest /= base;
            d
        })
        .collect();
    Ok(DigitWord { base, digits })
}

pub fn from_digits(word: &DigitWord) -> usize {
    word.digits.iter().rev().fold(0, |acc, &d| acc * word.base + d)
}

/// Complex vector of length `N^p` identified with a step function on `[0,1)`.
/// Entry `k = k_1 + N·k_2 + …` is the value on the cell starting at
/// `0.k_1 k_2 … k_p` in base N.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSignal {
    base: usize,
    resolution: usize,
    values: Vec<Complex64>,
}

impl GridSignal {
    pub fn new(base: usize, resolution: usize, values: Vec<Complex64>) -> Result<Self, BasisError> {
        if grid_len(base, resolution)? != values.len() {
            return Err(BasisError::LengthMismatch { len: values.len(), base, resolution });
        }
        Ok(Self { base, resolution, values })
    }

    pub fn from_real(base: usize, resolution: usize, values: &[f64]) -> Result<Self, BasisError> {
        Self::new(base, resolution, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(base: usize, resolution: usize, value: Complex64) -> Result<Self, BasisError> {
        Ok(Self { base, resolution, values: vec![value; grid_len(base, resolution)?] })
    }

    pub fn dirac(base: usize, resolution: usize, index: usize) -> Result<Self, BasisError> {
        let len = grid_len(base, resolution)?;
        if index >= len {
            return Err(BasisError::OutOfRange { value: index, base, len: resolution });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        values[index] = Complex64::new(1.0, 0.0);
        Ok(Self { base, resolution, values })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Build from samples listed left to right across `[0,1)`.
    pub fn from_natural_order(base: usize, resolution: usize, samples: &[Complex64]) -> Result<Self, BasisError> {
        let len = grid_len(base, resolution)?;
        if samples.len() != len {
            return Err(BasisError::LengthMismatch { len: samples.len(), base, resolution });
        }
        let values = (0..len).map(|k| samples[reverse_digits(k, base, resolution)]).collect();
        Self::new(base, resolution, values)
    }

    /// Values listed left to right across `[0,1)`.
    pub fn natural_order(&self) -> Vec<Complex64> {
        (0..self.len()).map(|pos| self.values[reverse_digits(pos, self.base, self.resolution)]).collect()
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(Σ|v_k|²/N^p)^{1/2}`, the L² norm of the step function.
    pub fn grid_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (sum / self.values.len() as f64).sqrt()
    }

    /// `Σ u_k·conj(v_k)/N^p`, the L² inner product of two step functions.
    pub fn grid_inner(&self, other: &GridSignal) -> Result<Complex64, BasisError> {
        if self.len() != other.len() {
            return Err(BasisError::LengthMismatch { len: other.len(), base: self.base, resolution: self.resolution });
        }
        let sum: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(sum / self.values.len() as f64)
    }

    /// Value of the step function at `x ∈ [0,1)`.
    pub fn at(&self, x: f64) -> Result<Complex64, BasisError> {
        Ok(self.values[cell_index(x, self.base, self.resolution)?])
    }
}

fn check_point(x: f64) -> Result<(), BasisError> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(BasisError::PointOutOfDomain(x))
    }
}

/// Reverse the `len` base-N digits of `k`. Maps the left-to-right position
/// `floor(N^p·x)` of a cell to its grid index and back.
pub fn reverse_digits(k: usize, base: usize, len: usize) -> usize {
    let mut rest = k;
    let mut out = 0;
    for _ in 0..len {
        out = out * base + rest % base;
        rest /= base;
    }
    out
}

/// Grid index `x_1 + N·x_2 + … + N^{p−1}·x_p` of the cell containing `x`.
pub fn cell_index(x: f64, base: usize, resolution: usize) -> Result<usize, BasisError> {
    check_point(x)?;
    let len = grid_len(base, resolution)?;
    let position = ((x * len as f64).floor() as usize).min(len - 1);
    Ok(reverse_digits(position, base, resolution))
}

fn check_row(a: &WalshMatrix, i: usize) -> Result<(), BasisError> {
    if i < a.n() {
        Ok(())
    } else {
        Err(BasisError::IndexOutOfRange { index: i, n: a.n() })
    }
}

/// Filter `m_i(x) = √N·a_{i,j}` with `j = floor(N·x)`.
pub fn filter_value(a: &WalshMatrix, i: usize, x: f64) -> Result<Complex64, BasisError> {
    check_row(a, i)?;
    let j = cell_index(x, a.n(), 1)?;
    Ok(a.entry(i, j) * (a.n() as f64).sqrt())
}

/// Product of generator entries over paired digits: `Π_k a[row_k, col_k]`.
pub(crate) fn digit_product(a: &WalshMatrix, row: usize, col: usize, p: usize) -> Complex64 {
    let n = a.n();
    let (mut r, mut c) = (row, col);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        acc *= a.entry(r % n, c % n);
        r /= n;
        c /= n;
    }
    acc
}

/// `W_n(x) = √(N^p)·a_{n_1 x_1}·…·a_{n_p x_p}` from the first `p` digits of `x`.
pub fn walsh_eval(a: &WalshMatrix, n: usize, x: f64, p: usize) -> Result<Complex64, BasisError> {
    let len = grid_len(a.n(), p)?;
    if n >= len {
        return Err(BasisError::OutOfRange { value: n, base: a.n(), len: p });
    }
    let cell = cell_index(x, a.n(), p)?;
    Ok(digit_product(a, n, cell, p) * (len as f64).sqrt())
}

/// Samples of `W_n` on the resolution-`p` grid: entry `k` is `√(N^p)·A^{⊗p}[n, k]`.
pub fn walsh_grid_vector(a: &WalshMatrix, n: usize, p: usize) -> Result<GridSignal, BasisError> {
    let len = grid_len(a.n(), p)?;
    if n >= len {
        return Err(BasisError::OutOfRange { value: n, base: a.n(), len: p });
    }
    let scale = (len as f64).sqrt();
    let values = (0..len).map(|k| digit_product(a, n, k, p) * scale).collect();
    GridSignal::new(a.n(), p, values)
}

fn check_base(a: &WalshMatrix, v: &GridSignal) -> Result<(), BasisError> {
    if a.n() == v.base {
        Ok(())
    } else {
        Err(BasisError::BaseMismatch { generator: a.n(), signal: v.base })
    }
}

/// `S_i f(x) = m_i(x)·f(Nx mod 1)`, taking resolution `p` to `p + 1`.
pub fn apply_s(a: &WalshMatrix, i: usize, v: &GridSignal) -> Result<GridSignal, BasisError> {
    check_row(a, i)?;
    check_base(a, v)?;
    let n = a.n();
    let sqrt_n = (n as f64).sqrt();
    let filter: Vec<Complex64> = a.matrix().row(i).iter().map(|z| z * sqrt_n).collect();
    let mut out = Vec::with_capacity(v.len() * n);
    for &value in &v.values {
        out.extend(filter.iter().map(|m| m * value));
    }
    GridSignal::new(n, v.resolution + 1, out)
}

/// Adjoint of [`apply_s`]: `(S_i^* v)(w) = N^{-1/2}·Σ_{x1} conj(a_{i,x1})·v(x1 w)`.
pub fn apply_s_adjoint(a: &WalshMatrix, i: usize, v: &GridSignal) -> Result<GridSignal, BasisError> {
    check_row(a, i)?;
    check_base(a, v)?;
    if v.resolution == 0 {
        return Err(BasisError::OutOfRange { value: 0, base: a.n(), len: 0 });
    }
    let n = a.n();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let out = v
        .values
        .chunks_exact(n)
        .map(|pencil| {
            let dot: Complex64 = a.matrix().row(i).iter().zip(pencil).map(|(aij, x)| aij.conj() * x).sum();
            dot * inv_sqrt_n
        })
        .collect();
    GridSignal::new(n, v.resolution - 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{gw3a, walsh2};
    use crate::linalg::validate_walsh;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn digit_examples() {
        assert_eq!(to_digits(0, 3, 3).unwrap().digits(), &[0, 0, 0]);
        assert_eq!(to_digits(14, 3, 3).unwrap().digits(), &[2, 1, 1]);
        assert_eq!(to_digits(5, 2, 3).unwrap().digits(), &[1, 0, 1]);
        assert_eq!(to_digits(5, 2, 3).unwrap().most_significant_first(), vec![1, 0, 1]);
        assert_eq!(to_digits(6, 2, 3).unwrap().to_string(), "(0,1,1)");
        assert!(matches!(to_digits(27, 3, 3), Err(BasisError::OutOfRange { .. })));
        assert!(DigitWord::new(2, vec![0, 2]).is_err());
    }

    #[test]
    fn digit_round_trip() {
        for n in 0..81 {
            assert_eq!(to_digits(n, 3, 4).unwrap().value(), n);
        }
    }

    #[test]
    fn filter_examples() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        for x in [0.0, 0.3, 0.5, 0.99] {
            assert!((filter_value(&a, 0, x).unwrap() - c(1.0)).norm() < 1e-14);
        }
        assert!((filter_value(&h, 1, 0.25).unwrap() - c(1.0)).norm() < 1e-14);
        assert!((filter_value(&h, 1, 0.75).unwrap() - c(-1.0)).norm() < 1e-14);
        assert_eq!(filter_value(&a, 1, 0.1).unwrap(), c(0.0));
        assert!(matches!(filter_value(&a, 3, 0.1), Err(BasisError::IndexOutOfRange { .. })));
    }

    #[test]
    fn domain_is_half_open() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        assert!(matches!(walsh_eval(&h, 1, 1.0, 1), Err(BasisError::PointOutOfDomain(_))));
        assert!(matches!(walsh_eval(&h, 1, -0.1, 1), Err(BasisError::PointOutOfDomain(_))));
        assert!(walsh_eval(&h, 1, f64::NAN, 1).is_err());
        // Terminating expansions take the right-hand cell.
        assert!((walsh_eval(&h, 1, 0.5, 1).unwrap() - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn eval_examples() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        for p in 1..4 {
            for x in [0.0, 0.2, 0.7] {
                assert!((walsh_eval(&a, 0, x, p).unwrap() - c(1.0)).norm() < 1e-13);
            }
        }
        assert!((walsh_eval(&h, 1, 0.1, 1).unwrap() - c(1.0)).norm() < 1e-14);
        assert!((walsh_eval(&h, 1, 0.6, 1).unwrap() - c(-1.0)).norm() < 1e-14);
        assert_eq!(walsh_eval(&a, 1, 0.1, 1).unwrap(), c(0.0));
        assert!(walsh_eval(&h, 4, 0.1, 2).is_err());
        // Extra zero digits of n leave the value unchanged.
        for x in [0.05, 0.3, 0.45, 0.6, 0.8] {
            let coarse = walsh_eval(&h, 1, x, 1).unwrap();
            for p in 2..5 {
                assert!((walsh_eval(&h, 1, x, p).unwrap() - coarse).norm() < 1e-13);
            }
        }
        // W_3 for N = 2 is m_1(x)·m_1(2x mod 1).
        let signs = [(0.1, 1.0), (0.3, -1.0), (0.6, -1.0), (0.9, 1.0)];
        for (x, want) in signs {
            assert!((walsh_eval(&h, 3, x, 2).unwrap() - c(want)).norm() < 1e-13);
        }
    }

    #[test]
    fn cell_indices_are_digit_reversed() {
        assert_eq!(cell_index(0.3, 2, 2).unwrap(), 2);
        assert_eq!(cell_index(0.6, 2, 2).unwrap(), 1);
        assert_eq!(cell_index(0.3, 3, 2).unwrap(), 6);
        assert_eq!(cell_index(0.999, 3, 1).unwrap(), 2);
        assert_eq!(reverse_digits(1, 2, 3), 4);
        assert_eq!(reverse_digits(reverse_digits(14, 3, 3), 3, 3), 14);
        let samples: Vec<Complex64> = (0..8).map(|k| c(k as f64)).collect();
        let g = GridSignal::from_natural_order(2, 3, &samples).unwrap();
        assert_eq!(g.natural_order(), samples);
        for (pos, s) in samples.iter().enumerate() {
            assert_eq!(g.at((pos as f64 + 0.5) / 8.0).unwrap(), *s);
        }
    }

    #[test]
    fn grid_vector_examples() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let ones = walsh_grid_vector(&h, 0, 3).unwrap();
        assert!(ones.values().iter().all(|z| (z - c(1.0)).norm() < 1e-14));
        let w3 = walsh_grid_vector(&h, 3, 2).unwrap();
        for (got, want) in w3.values().iter().zip([1.0, -1.0, -1.0, 1.0]) {
            assert!((got - c(want)).norm() < 1e-14);
        }
    }

    #[test]
    fn s_examples() {
        let h = validate_walsh(walsh2(), 1e-12).unwrap();
        let one = GridSignal::constant(2, 0, c(1.0)).unwrap();
        let s1 = apply_s(&h, 1, &one).unwrap();
        assert_eq!(s1.resolution(), 1);
        assert!((s1.values()[0] - c(1.0)).norm() < 1e-14);
        assert!((s1.values()[1] - c(-1.0)).norm() < 1e-14);
        let back = apply_s_adjoint(&h, 1, &s1).unwrap();
        assert_eq!(back.resolution(), 0);
        assert!((back.values()[0] - c(1.0)).norm() < 1e-14);
        let s0 = apply_s(&h, 0, &GridSignal::constant(2, 2, c(1.0)).unwrap()).unwrap();
        assert!(s0.values().iter().all(|z| (z - c(1.0)).norm() < 1e-14));
        assert!(apply_s_adjoint(&h, 0, &one).is_err());
    }

    #[test]
    fn s_rejects_base_mismatch() {
        let a = validate_walsh(gw3a(), 1e-12).unwrap();
        let v = GridSignal::constant(2, 1, c(1.0)).unwrap();
        assert!(matches!(apply_s(&a, 0, &v), Err(BasisError::BaseMismatch { .. })));
    }

    #[test]
    fn grid_signal_length_checked() {
        assert!(matches!(GridSignal::from_real(2, 2, &[1.0; 3]), Err(BasisError::LengthMismatch { .. })));
        assert!(GridSignal::dirac(3, 2, 9).is_err());
    }
}

//! Built-in generator matrices.
//!
//! `walsh2`, `gw3a` and `gw4` are exactly unitary (up to rounding of the
//! square roots). `gw3b` carries two-digit decimal entries and is only
//! approximately unitary; its largest deviation `‖BB* − I‖_max` is about
//! `0.0152` (row 1 has squared norm `0.9848`), so it validates at
//! [`GW3B_TOL`] rather than the default tolerance.

use num_complex::Complex64;

use crate::linalg::{validate_walsh, ComplexMatrix, LinalgError, WalshMatrix, DEFAULT_VALIDATION_TOL};

/// Validation tolerance for the decimal matrix `gw3b`.
pub const GW3B_TOL: f64 = 2e-2;

/// Classic 2×2 Walsh generator.
pub fn walsh2() -> ComplexMatrix {
    let s = 1.0 / 2f64.sqrt();
    ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).expect("static fixture")
}

/// 3×3 generator with a zero in column 0.
pub fn gw3a() -> ComplexMatrix {
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    #[rustfmt::skip]
    let entries = [
        1.0 / s3, 1.0 / s3, 1.0 / s3,
        0.0, 1.0 / s2, -1.0 / s2,
        -2.0 / s6, 1.0 / s6, 1.0 / s6,
    ];
    ComplexMatrix::from_real(3, 3, &entries).expect("static fixture")
}

/// 3×3 approximately unitary generator with decimal entries.
pub fn gw3b() -> ComplexMatrix {
    let s3 = 3f64.sqrt();
    #[rustfmt::skip]
    let entries = [
        1.0 / s3, 1.0 / s3, 1.0 / s3,
        -0.2, -0.58, 0.78,
        -0.79, 0.57, 0.22,
    ];
    ComplexMatrix::from_real(3, 3, &entries).expect("static fixture")
}

/// 4×4 generator mixing Haar-like and Walsh-like rows.
pub fn gw4() -> ComplexMatrix {
    let s = 1.0 / 2f64.sqrt();
    #[rustfmt::skip]
    let entries = [
        0.5, 0.5, 0.5, 0.5,
        s, -s, 0.0, 0.0,
        0.0, 0.0, s, -s,
        0.5, 0.5, -0.5, -0.5,
    ];
    ComplexMatrix::from_real(4, 4, &entries).expect("static fixture")
}

/// Normalized `n×n` Fourier matrix `F[j,k] = e^{-2πi jk/n}/√n`.
pub fn fourier(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        let angle = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, angle)
    })
}

/// Orthonormal DCT-II matrix: `row k, col j = c_k·cos(π(2j+1)k/(2n))`.
pub fn dct_matrix(n: usize) -> ComplexMatrix {
    let nf = n as f64;
    ComplexMatrix::from_fn(n, n, |k, j| {
        let ck = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        let angle = std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf);
        Complex64::new(ck * angle.cos(), 0.0)
    })
}

/// Matrix for a builtin name, if known: `walsh2`, `gw3a`, `gw3b`, `gw4`,
/// `fourier:N`, `dct:N`.
pub fn builtin(name: &str) -> Option<ComplexMatrix> {
    match name {
        "walsh2" => Some(walsh2()),
        "gw3a" => Some(gw3a()),
        "gw3b" => Some(gw3b()),
        "gw4" => Some(gw4()),
        _ => {
            let (kind, size) = name.split_once(':')?;
            let n: usize = size.parse().ok().filter(|&n| n >= 1)?;
            match kind {
                "fourier" => Some(fourier(n)),
                "dct" => Some(dct_matrix(n)),
                _ => None,
            }
        }
    }
}

/// Tolerance a builtin generator is validated at by default.
pub fn default_tol(name: &str) -> f64 {
    if name == "gw3b" {
        GW3B_TOL
    } else {
        DEFAULT_VALIDATION_TOL
    }
}

/// Validated builtin generator at its default tolerance.
pub fn builtin_walsh(name: &str) -> Option<Result<WalshMatrix, LinalgError>> {
    builtin(name).map(|m| validate_walsh(m, default_tol(name)))
}

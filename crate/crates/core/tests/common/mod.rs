#![allow(dead_code)]

use genwalsh::linalg::{validate_walsh, ComplexMatrix, WalshMatrix};
use genwalsh::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalizes `rows` in order, drawing random vectors until there are `n`.
fn complete_rows(rng: &mut ChaCha8Rng, n: usize, mut rows: Vec<Vec<Complex64>>) -> ComplexMatrix {
    while rows.len() < n {
        let mut v = random_vec(rng, n);
        for _ in 0..2 {
            for r in &rows {
                let dot: Complex64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi -= dot * ri;
                }
            }
        }
        let len = norm(&v);
        if len > 1e-3 {
            rows.push(v.into_iter().map(|z| z / len).collect());
        }
    }
    ComplexMatrix::new(n, n, rows.into_iter().flatten().collect()).unwrap()
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    complete_rows(rng, n, Vec::new())
}

/// Random generator: constant first row completed to a unitary.
pub fn random_walsh(rng: &mut ChaCha8Rng, n: usize) -> WalshMatrix {
    let first = vec![c(1.0 / (n as f64).sqrt()); n];
    validate_walsh(complete_rows(rng, n, vec![first]), 1e-10).unwrap()
}

/// `A^{⊗p}[row, col]` as a product over little-endian digit pairs.
pub fn power_entry(a: &ComplexMatrix, row: usize, col: usize, p: usize) -> Complex64 {
    let n = a.rows();
    let (mut r, mut k) = (row, col);
    let mut acc = c(1.0);
    for _ in 0..p {
        acc *= a[(r % n, k % n)];
        r /= n;
        k /= n;
    }
    acc
}

/// Analysis `conj(A)^{⊗p} f` summed entry by entry.
pub fn analysis_oracle(a: &ComplexMatrix, p: usize, f: &[Complex64]) -> Vec<Complex64> {
    (0..f.len()).map(|row| (0..f.len()).map(|col| power_entry(a, row, col, p).conj() * f[col]).sum()).collect()
}

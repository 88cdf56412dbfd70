//! Thin dense helpers over `faer` used by the operator builders.

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn cr(re: f64) -> c64 {
    c64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn to_complex(m: &Mat<f64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| cr(m[(i, j)]))
}

pub fn dagger(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn scale(a: &CMat, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    sub(&(a * b), &(b * a))
}

/// Kronecker product `a ⊗ b`; `a` indexes the slow (outer) factor.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs(&sub(a, &dagger(a)))
}

pub fn trace(a: &CMat) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Tr(op·ρ) without forming the product.
pub fn expect(op: &CMat, rho: &CMat) -> c64 {
    let n = op.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..n {
            s += op[(i, k)] * rho[(k, i)];
        }
    }
    s
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> Result<f64> {
    let s = a.singular_values().map_err(|_| Error::Eigen)?;
    Ok(s.first().copied().unwrap_or(0.0))
}

pub fn submatrix(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Hermitian part `(A + A†)/2`.
pub fn hermitize(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
}

/// `Σ_k v_k f(λ_k) v_kᵀ` for a real orthonormal eigenbasis.
pub fn spectral_apply(vecs: &Mat<f64>, vals: &[f64], f: impl Fn(f64) -> f64) -> Mat<f64> {
    let n = vals.len();
    let fv: Vec<f64> = vals.iter().map(|&v| f(v)).collect();
    let scaled = Mat::from_fn(n, n, |i, k| vecs[(i, k)] * fv[k]);
    let vt = vecs.transpose().to_owned();
    &scaled * &vt
}

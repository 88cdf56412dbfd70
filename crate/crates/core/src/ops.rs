//! Truncated Fock-space operators for one bosonic mode, optionally
//! tensored with a spin-1/2.
//!
//! Spin⊗boson operators use `kron(spin, boson)`: the state index is
//! `s·n_c + m`, with `s = 0` the `σ_z = +1` level (the `+` branch after
//! the adiabatic rotation). Functions of `x̂` are applied through the
//! eigen-decomposition of the truncated position matrix.

use std::io::{Read, Write};

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, kron, CMat, I, ONE, ZERO};
use crate::params::{Branch, ModelParams};

#[derive(Clone, Debug)]
pub struct FockOperator {
    pub cutoff: usize,
    /// `true` when the matrix acts on spin⊗boson (dimension `2·n_c`).
    pub spin: bool,
    pub hermitian: bool,
    pub matrix: CMat,
}

impl FockOperator {
    fn boson(cutoff: usize, matrix: CMat, hermitian: bool) -> Self {
        FockOperator { cutoff, spin: false, hermitian, matrix }
    }

    fn spin_boson(cutoff: usize, matrix: CMat, hermitian: bool) -> Self {
        FockOperator { cutoff, spin: true, hermitian, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        FockOperator { matrix: linalg::dagger(&self.matrix), ..self.clone() }
    }

    /// Indices whose Fock label lies below `n_c − n_guard`.
    pub fn interior_indices(&self, n_guard: usize) -> Vec<usize> {
        interior_indices(self.cutoff, self.spin, n_guard)
    }

    pub fn interior_block(&self, n_guard: usize) -> CMat {
        let idx = self.interior_indices(n_guard);
        linalg::submatrix(&self.matrix, &idx, &idx)
    }

    /// Dimensions as two little-endian `u64`, then row-major `(re, im)` pairs.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        let m = &self.matrix;
        w.write_all(&(m.nrows() as u64).to_le_bytes())?;
        w.write_all(&(m.ncols() as u64).to_le_bytes())?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.write_all(&m[(i, j)].re.to_le_bytes())?;
                w.write_all(&m[(i, j)].im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_matrix(r: &mut impl Read) -> Result<CMat> {
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let rows = u64::from_le_bytes(next(r)?) as usize;
        let cols = u64::from_le_bytes(next(r)?) as usize;
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = f64::from_le_bytes(next(r)?);
                let im = f64::from_le_bytes(next(r)?);
                m[(i, j)] = faer::c64::new(re, im);
            }
        }
        Ok(m)
    }
}

pub fn guard_band(n_c: usize) -> usize {
    10.max(n_c / 10)
}

pub fn interior_indices(n_c: usize, spin: bool, n_guard: usize) -> Vec<usize> {
    let keep = n_c.saturating_sub(n_guard);
    let sectors = if spin { 2 } else { 1 };
    (0..sectors).flat_map(|s| (0..keep).map(move |m| s * n_c + m)).collect()
}

fn check_cutoff(n_c: usize) {
    assert!(n_c >= 2, "Fock cutoff must be at least 2, got {n_c}");
}

pub fn annihilation(n_c: usize) -> FockOperator {
    check_cutoff(n_c);
    let m = Mat::from_fn(n_c, n_c, |i, j| if j == i + 1 { cr((j as f64).sqrt()) } else { ZERO });
    FockOperator::boson(n_c, m, false)
}

fn position_real(n_c: usize) -> Mat<f64> {
    Mat::from_fn(n_c, n_c, |i, j| {
        if j == i + 1 {
            (j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            (i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// `x̂ = (a + a†)/√2`.
pub fn position(n_c: usize) -> FockOperator {
    check_cutoff(n_c);
    FockOperator::boson(n_c, linalg::to_complex(&position_real(n_c)), true)
}

/// `p̂ = i(a† − a)/√2`.
pub fn momentum(n_c: usize) -> FockOperator {
    check_cutoff(n_c);
    let m = Mat::from_fn(n_c, n_c, |i, j| {
        if j == i + 1 {
            -I * (j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            I * (i as f64 / 2.0).sqrt()
        } else {
            ZERO
        }
    });
    FockOperator::boson(n_c, m, true)
}

pub fn number(n_c: usize) -> FockOperator {
    check_cutoff(n_c);
    FockOperator::boson(n_c, Mat::from_fn(n_c, n_c, |i, j| if i == j { cr(i as f64) } else { ZERO }), true)
}

pub fn sigma_x() -> CMat {
    Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn sigma_y() -> CMat {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    })
}

pub fn sigma_z() -> CMat {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => ONE,
        (1, 1) => -ONE,
        _ => ZERO,
    })
}

/// Eigen-decomposition of the truncated `x̂`, reused for every function of
/// position.
#[derive(Clone, Debug)]
pub struct PositionSpectrum {
    pub vectors: Mat<f64>,
    pub values: Vec<f64>,
}

impl PositionSpectrum {
    pub fn new(n_c: usize) -> Result<Self> {
        check_cutoff(n_c);
        let evd = position_real(n_c).self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let s = evd.S();
        let values = (0..n_c).map(|k| s[k]).collect();
        Ok(PositionSpectrum { vectors: evd.U().to_owned(), values })
    }

    pub fn cutoff(&self) -> usize {
        self.values.len()
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Mat<f64> {
        linalg::spectral_apply(&self.vectors, &self.values, f)
    }
}

/// Scalar `V_nl(x) = (ω₀η/2)√(2g²x²/η + 1)`.
pub fn v_nl_scalar(x: f64, p: &ModelParams) -> f64 {
    0.5 * p.omega0 * p.eta * (2.0 * p.g * p.g * x * x / p.eta + 1.0).sqrt()
}

/// Rotation angle `θ(x) = arctan(g x √(2/η))`.
pub fn theta_scalar(x: f64, p: &ModelParams) -> f64 {
    (p.g * x * (2.0 / p.eta).sqrt()).atan()
}

/// `ε(x) = θ'(x)/(2√2)`.
pub fn epsilon_scalar(x: f64, p: &ModelParams) -> f64 {
    let k = p.g * (2.0 / p.eta).sqrt();
    k / (2.0 * 2f64.sqrt() * (1.0 + 2.0 * p.g * p.g * x * x / p.eta))
}

/// `ω₀a†a + (μ/2)ω₀(a² + a†²)` on the boson space.
fn amplified_oscillator(p: &ModelParams, n_c: usize) -> CMat {
    let w = p.omega0;
    Mat::from_fn(n_c, n_c, |i, j| {
        if i == j {
            cr(w * i as f64)
        } else if j == i + 2 {
            cr(0.5 * p.mu * w * ((i + 1) as f64 * (i + 2) as f64).sqrt())
        } else if i == j + 2 {
            cr(0.5 * p.mu * w * ((j + 1) as f64 * (j + 2) as f64).sqrt())
        } else {
            ZERO
        }
    })
}

/// Complete spin⊗boson Hamiltonian in physical units.
pub fn hamiltonian_full(p: &ModelParams, n_c: usize) -> FockOperator {
    check_cutoff(n_c);
    let r = p.raw_rates();
    let id2 = linalg::identity(2);
    let x_sum = linalg::scale(&position(n_c).matrix, cr(2f64.sqrt()));
    let mut h = kron(&id2, &amplified_oscillator(p, n_c));
    h = linalg::add(&h, &kron(&linalg::scale(&sigma_z(), cr(0.5 * r.omega)), &linalg::identity(n_c)));
    h = linalg::add(&h, &kron(&linalg::scale(&sigma_x(), cr(r.lambda)), &x_sum));
    FockOperator::spin_boson(n_c, h, true)
}

pub fn v_nl(p: &ModelParams, spec: &PositionSpectrum) -> Mat<f64> {
    spec.apply(|x| v_nl_scalar(x, p))
}

/// Effective boson Hamiltonian of one adiabatic branch, `H_osc ± V_nl(x̂)`.
pub fn hamiltonian_branch(p: &ModelParams, b: Branch, n_c: usize) -> Result<FockOperator> {
    let spec = PositionSpectrum::new(n_c)?;
    Ok(hamiltonian_branch_with(p, b, &spec))
}

pub fn hamiltonian_branch_with(p: &ModelParams, b: Branch, spec: &PositionSpectrum) -> FockOperator {
    let n_c = spec.cutoff();
    let v = v_nl(p, spec);
    let s = b.sign();
    let mut h = amplified_oscillator(p, n_c);
    for j in 0..n_c {
        for i in 0..n_c {
            h[(i, j)] += cr(s * v[(i, j)]);
        }
    }
    FockOperator::boson(n_c, linalg::hermitize(&h), true)
}

/// Spin-diagonal Hamiltonian from expanding `V_nl` to order `η⁻²`.
pub fn hamiltonian_perturbative(p: &ModelParams, n_c: usize) -> FockOperator {
    check_cutoff(n_c);
    let w = p.omega0;
    let (g, eta) = (p.g, p.eta);
    let xs = linalg::scale(&position(n_c).matrix, cr(2f64.sqrt()));
    let x2 = &xs * &xs;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let mut poly = linalg::scale(&x2, cr(w * g * g / 4.0));
    poly = linalg::sub(&poly, &linalg::scale(&x4, cr(w * g.powi(4) / (16.0 * eta))));
    poly = linalg::add(&poly, &linalg::scale(&x6, cr(w * g.powi(6) / (32.0 * eta * eta))));
    poly = linalg::add(&poly, &linalg::scale(&linalg::identity(n_c), cr(0.5 * w * eta)));
    let mut h = kron(&linalg::identity(2), &amplified_oscillator(p, n_c));
    h = linalg::add(&h, &kron(&sigma_z(), &poly));
    FockOperator::spin_boson(n_c, linalg::hermitize(&h), true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitaryKind {
    /// `exp(−iσ_y θ(x̂)/2)`.
    Exact,
    /// `exp(−i(g/2√η)(a + a†)σ_y)`.
    Linearized,
}

#[derive(Clone, Debug)]
pub struct AdiabaticUnitary {
    pub kind: UnitaryKind,
    pub cutoff: usize,
    pub matrix: CMat,
}

impl AdiabaticUnitary {
    /// `max |U†U − I|` on the interior block.
    pub fn unitarity_defect(&self, n_guard: usize) -> f64 {
        let uu = &linalg::dagger(&self.matrix) * &self.matrix;
        let idx = interior_indices(self.cutoff, true, n_guard);
        let block = linalg::submatrix(&uu, &idx, &idx);
        linalg::max_abs(&linalg::sub(&block, &linalg::identity(idx.len())))
    }

    /// `U† A U`.
    pub fn conjugate(&self, a: &CMat) -> CMat {
        &(&linalg::dagger(&self.matrix) * a) * &self.matrix
    }
}

/// Half-angle of the spin rotation as a function of position.
fn half_angle(p: &ModelParams, kind: UnitaryKind) -> impl Fn(f64) -> f64 + '_ {
    move |x| match kind {
        UnitaryKind::Exact => 0.5 * theta_scalar(x, p),
        UnitaryKind::Linearized => p.g / (2.0 * p.eta.sqrt()) * 2f64.sqrt() * x,
    }
}

pub fn adiabatic_unitary(p: &ModelParams, n_c: usize, kind: UnitaryKind) -> Result<AdiabaticUnitary> {
    let spec = PositionSpectrum::new(n_c)?;
    Ok(adiabatic_unitary_with(p, &spec, kind))
}

pub fn adiabatic_unitary_with(p: &ModelParams, spec: &PositionSpectrum, kind: UnitaryKind) -> AdiabaticUnitary {
    let phi = half_angle(p, kind);
    let c = linalg::to_complex(&spec.apply(|x| phi(x).cos()));
    let s = linalg::to_complex(&spec.apply(|x| phi(x).sin()));
    // exp(−iσ_y φ) = cos φ − iσ_y sin φ, and −iσ_y = [[0, −1], [1, 0]]
    let minus_i_sy = linalg::scale(&sigma_y(), -I);
    let u = linalg::add(&kron(&linalg::identity(2), &c), &kron(&minus_i_sy, &s));
    AdiabaticUnitary { kind, cutoff: spec.cutoff(), matrix: u }
}

pub fn epsilon_operator(p: &ModelParams, n_c: usize) -> Result<FockOperator> {
    let spec = PositionSpectrum::new(n_c)?;
    Ok(epsilon_operator_with(p, &spec))
}

pub fn epsilon_operator_with(p: &ModelParams, spec: &PositionSpectrum) -> FockOperator {
    let e = spec.apply(|x| epsilon_scalar(x, p));
    FockOperator::boson(spec.cutoff(), linalg::to_complex(&e), true)
}

/// Jump operators in the rotated frame:
/// `c₁ = a − iε σ_y`, `c₂ = a² − i(εa + aε)σ_y − ε²`.
pub fn transformed_jumps(p: &ModelParams, n_c: usize) -> Result<(FockOperator, FockOperator)> {
    let spec = PositionSpectrum::new(n_c)?;
    let eps = epsilon_operator_with(p, &spec).matrix;
    let a = annihilation(n_c).matrix;
    let id2 = linalg::identity(2);
    let sy = sigma_y();
    let c1 = linalg::sub(&kron(&id2, &a), &kron(&linalg::scale(&sy, I), &eps));
    let a2 = &a * &a;
    let anti = linalg::add(&(&eps * &a), &(&a * &eps));
    let mut c2 = kron(&id2, &a2);
    c2 = linalg::sub(&c2, &kron(&linalg::scale(&sy, I), &anti));
    c2 = linalg::sub(&c2, &kron(&id2, &(&eps * &eps)));
    Ok((FockOperator::spin_boson(n_c, c1, false), FockOperator::spin_boson(n_c, c2, false)))
}

/// Which steady state the cutoff loop monitors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffTarget {
    Branch(Branch),
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffConfig {
    pub start: usize,
    pub tol: f64,
    pub hard_max: usize,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        CutoffConfig { start: 32, tol: 1e-10, hard_max: 4096 }
    }
}

/// Doubles `n_c` from `cfg.start` until the steady-state population of the
/// top Fock level falls below `cfg.tol`.
pub fn cutoff_select(p: &ModelParams, target: CutoffTarget, cfg: &CutoffConfig) -> Result<usize> {
    cutoff_select_with_tails(p, target, cfg).map(|(n, _)| n)
}

/// As [`cutoff_select`], also returning the `(n_c, tail)` history.
pub fn cutoff_select_with_tails(
    p: &ModelParams,
    target: CutoffTarget,
    cfg: &CutoffConfig,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParams(format!("cutoff tolerance must be positive, got {}", cfg.tol)));
    }
    let mut n_c = cfg.start.max(2);
    let mut history = Vec::new();
    loop {
        if n_c > cfg.hard_max {
            return Err(Error::CutoffLimit(cfg.hard_max));
        }
        let tail = crate::lindblad::top_level_population(p, target, n_c)?;
        history.push((n_c, tail));
        if tail < cfg.tol {
            return Ok((n_c, history));
        }
        n_c *= 2;
    }
}

#[cfg(test)]
mod tests;

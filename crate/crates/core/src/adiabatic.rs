//! Splitting spin⊗boson states into adiabatic branches, and the spin
//! weights of the classical-mixture ansatz.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{self, DensityMatrix, Observables};
use crate::linalg::{self, cr, CMat};
use crate::ops::{self, PositionSpectrum, UnitaryKind};
use crate::params::{Branch, ModelParams};

/// Weight below which a branch counts as empty.
pub const MIN_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    ExactUS,
    LinearUS1,
}

impl Scheme {
    pub fn unitary_kind(self) -> UnitaryKind {
        match self {
            Scheme::ExactUS => UnitaryKind::Exact,
            Scheme::LinearUS1 => UnitaryKind::Linearized,
        }
    }
}

fn spin_index(b: Branch) -> usize {
    match b {
        Branch::Plus => 0,
        Branch::Minus => 1,
    }
}

#[derive(Clone, Debug)]
pub struct BranchDecomposition {
    pub scheme: Scheme,
    pub p_plus: f64,
    pub p_minus: f64,
    pub rho_plus: Option<DensityMatrix>,
    pub rho_minus: Option<DensityMatrix>,
    /// Frobenius norm of the dropped `⟨+|ρ′|−⟩` block.
    pub discarded_coherence: f64,
}

impl BranchDecomposition {
    pub fn weight(&self, b: Branch) -> f64 {
        match b {
            Branch::Plus => self.p_plus,
            Branch::Minus => self.p_minus,
        }
    }

    pub fn branch(&self, b: Branch) -> Result<&DensityMatrix> {
        let r = match b {
            Branch::Plus => self.rho_plus.as_ref(),
            Branch::Minus => self.rho_minus.as_ref(),
        };
        r.ok_or(Error::DegenerateWeight(self.weight(b)))
    }

    pub fn report(&self) -> DecompositionReport {
        let obs = |r: &Option<DensityMatrix>| r.as_ref().map(lindblad::observables);
        DecompositionReport {
            scheme: self.scheme,
            p_plus: self.p_plus,
            p_minus: self.p_minus,
            discarded_coherence: self.discarded_coherence,
            plus: obs(&self.rho_plus),
            minus: obs(&self.rho_minus),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub scheme: Scheme,
    pub p_plus: f64,
    pub p_minus: f64,
    pub discarded_coherence: f64,
    pub plus: Option<Observables>,
    pub minus: Option<Observables>,
}

/// `ρ′ = U†ρU`, followed by projection on the rotated spin basis.
pub fn extract_branches(rho_full: &DensityMatrix, p: &ModelParams, scheme: Scheme) -> Result<BranchDecomposition> {
    if !rho_full.spin {
        return Err(Error::ShapeMismatch("branch extraction needs a spin⊗boson state".into()));
    }
    let n_c = rho_full.cutoff;
    let u = ops::adiabatic_unitary(p, n_c, scheme.unitary_kind())?;
    let rotated = DensityMatrix { matrix: u.conjugate(&rho_full.matrix), spin: true, cutoff: n_c };
    let coh = rotated.spin_block(0, 1);
    let mut frob = 0.0;
    for j in 0..n_c {
        for i in 0..n_c {
            frob += coh[(i, j)].norm_sqr();
        }
    }
    let part = |b: Branch| -> (f64, Option<DensityMatrix>) {
        let s = spin_index(b);
        let block = linalg::hermitize(&rotated.spin_block(s, s));
        let w = linalg::trace(&block).re;
        if w < MIN_WEIGHT {
            return (w.max(0.0), None);
        }
        let m = linalg::scale(&block, cr(1.0 / w));
        (w, Some(DensityMatrix { matrix: m, spin: false, cutoff: n_c }))
    };
    let (p_plus, rho_plus) = part(Branch::Plus);
    let (p_minus, rho_minus) = part(Branch::Minus);
    Ok(BranchDecomposition { scheme, p_plus, p_minus, rho_plus, rho_minus, discarded_coherence: frob.sqrt() })
}

/// `p₊/p₋ = (4γ₂n₋/η + γ₁)/(4γ₂n₊/η + γ₁)`.
pub fn spin_weight_ratio_perturbative(n_plus: f64, n_minus: f64, p: &ModelParams) -> Result<f64> {
    let num = 4.0 * p.gamma2 * n_minus / p.eta + p.gamma1;
    let den = 4.0 * p.gamma2 * n_plus / p.eta + p.gamma1;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// `⟨ε²⟩` and `⟨a†ε²a⟩` in a boson state.
fn epsilon_moments(rho: &DensityMatrix, spec: &PositionSpectrum, p: &ModelParams) -> (f64, f64) {
    let e = ops::epsilon_operator_with(p, spec).matrix;
    let e2 = &e * &e;
    let a = ops::annihilation(rho.cutoff).matrix;
    let o2 = &(&linalg::dagger(&a) * &e2) * &a;
    (linalg::expect(&e2, &rho.matrix).re, linalg::expect(&o2, &rho.matrix).re)
}

/// `p₊/p₋ = (4γ₂⟨O₂⟩₋/η + γ₁⟨O₁⟩₋)/(4γ₂⟨O₂⟩₊/η + γ₁⟨O₁⟩₊)` with
/// `O₁ = ε(x̂)²`, `O₂ = a†ε(x̂)²a`.
pub fn spin_weight_ratio_complete(rho_plus: &DensityMatrix, rho_minus: &DensityMatrix, p: &ModelParams) -> Result<f64> {
    if rho_plus.cutoff != rho_minus.cutoff || rho_plus.spin || rho_minus.spin {
        return Err(Error::ShapeMismatch("branch states must be boson-only with equal cutoffs".into()));
    }
    let spec = PositionSpectrum::new(rho_plus.cutoff)?;
    let (o1p, o2p) = epsilon_moments(rho_plus, &spec, p);
    let (o1m, o2m) = epsilon_moments(rho_minus, &spec, p);
    let num = 4.0 * p.gamma2 * o2m / p.eta + p.gamma1 * o1m;
    let den = 4.0 * p.gamma2 * o2p / p.eta + p.gamma1 * o1p;
    if den.abs() < f64::MIN_POSITIVE {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// `(p₊, p₋)` from `r_p = p₊/p₋`.
pub fn weights_from_ratio(r: f64) -> (f64, f64) {
    if r.is_infinite() {
        return (1.0, 0.0);
    }
    (r / (1.0 + r), 1.0 / (1.0 + r))
}

/// `g²⟨x²⟩/η` of a branch state; the perturbative weights need it small.
pub fn perturbative_validity(rho: &DensityMatrix, p: &ModelParams) -> f64 {
    p.g * p.g * lindblad::observables(rho).x2 / p.eta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSource {
    Extracted,
    Complete,
    Perturbative,
}

/// Weight ratio from the most accurate available source: a full solve if
/// given, then the ε-moment formula, then the photon-number formula.
pub fn spin_weights(
    p: &ModelParams,
    full: Option<&DensityMatrix>,
    rho_plus: &DensityMatrix,
    rho_minus: &DensityMatrix,
) -> Result<(f64, WeightSource)> {
    if let Some(rho) = full {
        let dec = extract_branches(rho, p, Scheme::ExactUS)?;
        let r = if dec.p_minus > 0.0 { dec.p_plus / dec.p_minus } else { f64::INFINITY };
        return Ok((r, WeightSource::Extracted));
    }
    match spin_weight_ratio_complete(rho_plus, rho_minus, p) {
        Ok(r) => Ok((r, WeightSource::Complete)),
        Err(Error::ZeroDenominator) => {
            let n = |r: &DensityMatrix| lindblad::observables(r).n;
            match spin_weight_ratio_perturbative(n(rho_plus), n(rho_minus), p) {
                Ok(r) => Ok((r, WeightSource::Perturbative)),
                Err(Error::ZeroDenominator) => Ok((1.0, WeightSource::Perturbative)),
                Err(e) => Err(e),
            }
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixtureFrame {
    /// Weighted branch averages; `s_z` from the spin-diagonal part of the
    /// rotated `σ_z`, `±cos θ(x̂)`.
    Rotated,
    /// Observables of `U ρ′ U†` with the exact rotation.
    Lab,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureObservables {
    pub p_plus: f64,
    pub n: f64,
    pub sz: f64,
    pub x2: f64,
    pub p2: f64,
}

/// `ρ′ = p₊ρ₊|+⟩⟨+| + p₋ρ₋|−⟩⟨−|` as a spin⊗boson matrix.
pub fn mixture_state(p_plus: f64, rho_plus: &DensityMatrix, rho_minus: &DensityMatrix) -> DensityMatrix {
    let n = rho_plus.cutoff;
    let p_minus = 1.0 - p_plus;
    let m = Mat::from_fn(2 * n, 2 * n, |i, j| match (i / n, j / n) {
        (0, 0) => rho_plus.matrix[(i, j)] * p_plus,
        (1, 1) => rho_minus.matrix[(i - n, j - n)] * p_minus,
        _ => cr(0.0),
    });
    DensityMatrix { matrix: m, spin: true, cutoff: n }
}

pub fn mixture_observables(
    p: &ModelParams,
    p_plus: f64,
    rho_plus: &DensityMatrix,
    rho_minus: &DensityMatrix,
    frame: MixtureFrame,
) -> Result<MixtureObservables> {
    let n_c = rho_plus.cutoff;
    if rho_minus.cutoff != n_c {
        return Err(Error::ShapeMismatch("branch cutoffs differ".into()));
    }
    match frame {
        MixtureFrame::Rotated => {
            let p_minus = 1.0 - p_plus;
            let (op, om) = (lindblad::observables(rho_plus), lindblad::observables(rho_minus));
            let spec = PositionSpectrum::new(n_c)?;
            let cos_t: CMat = linalg::to_complex(&spec.apply(|x| ops::theta_scalar(x, p).cos()));
            let c = |r: &DensityMatrix| linalg::expect(&cos_t, &r.matrix).re;
            Ok(MixtureObservables {
                p_plus,
                n: p_plus * op.n + p_minus * om.n,
                sz: p_plus * c(rho_plus) - p_minus * c(rho_minus),
                x2: p_plus * op.x2 + p_minus * om.x2,
                p2: p_plus * op.p2 + p_minus * om.p2,
            })
        }
        MixtureFrame::Lab => {
            let mix = mixture_state(p_plus, rho_plus, rho_minus);
            let u = ops::adiabatic_unitary(p, n_c, UnitaryKind::Exact)?;
            let lab = &(&u.matrix * &mix.matrix) * &linalg::dagger(&u.matrix);
            let obs = lindblad::observables(&DensityMatrix { matrix: lab, spin: true, cutoff: n_c });
            Ok(MixtureObservables { p_plus, n: obs.n, sz: obs.sz.unwrap_or(0.0), x2: obs.x2, p2: obs.p2 })
        }
    }
}

#[cfg(test)]
mod tests;

//! Finite-frequency scaling at the critical coupling, the `ν` exponent, and
//! the `(Θ, Λ)` scaling collapse of the (−) branch.
//!
//! All collapse variables come from the Langevin coefficients at `g = g_c`:
//! `L = C₆^{-1/2}`, `Λ = C₄L^{4/3}`, `Θ = |g − g_c|L^{2/3}`,
//! `F̃ = Δx²L^{-2/3}`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::langevin::{self, Boltzmann, EnsembleConfig, PotentialForm};
use crate::lindblad::{self, Cutoff};
use crate::meanfield::critical_coupling_gc;
use crate::ops::CutoffConfig;
use crate::params::{Branch, ModelParams};
use crate::roots::{brent, geomspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Branch master-equation steady state.
    #[serde(rename = "master")]
    MasterEq,
    /// Boltzmann moments by quadrature.
    Quadrature,
    /// Langevin SDE ensemble.
    Ensemble,
}

impl Backend {
    pub fn label(self) -> &'static str {
        match self {
            Backend::MasterEq => "master",
            Backend::Quadrature => "quadrature",
            Backend::Ensemble => "ensemble",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "master" => Ok(Backend::MasterEq),
            "quadrature" => Ok(Backend::Quadrature),
            "ensemble" => Ok(Backend::Ensemble),
            _ => Err(Error::Config(format!("unknown backend {s:?}"))),
        }
    }
}

/// Per-backend controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub cutoff: CutoffConfig,
    pub ensemble: EnsembleConfig,
}

/// `Δx²` of the (−) branch.
pub fn delta_x2(p: &ModelParams, backend: Backend, cfg: &BackendConfig) -> Result<f64> {
    match backend {
        Backend::Quadrature => Boltzmann::new(p, Branch::Minus, PotentialForm::Exact)?.moment(0, 2),
        Backend::MasterEq => {
            Ok(lindblad::steady_state_branch(p, Branch::Minus, Cutoff::Auto(cfg.cutoff))?.observables.dx2)
        }
        Backend::Ensemble => Ok(langevin::simulate_ensemble(p, Branch::Minus, &cfg.ensemble)?.x2.mean),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub omega0: f64,
    pub mu: f64,
    pub gamma1: f64,
    pub eta: f64,
    pub g: f64,
    pub gamma2: f64,
    pub backend: Backend,
    /// `NaN` when the sample failed.
    pub dx2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "Ftilde")]
    pub ftilde: f64,
    pub status: SampleStatus,
}

/// `(L, Λ)` from the coefficients at `g = g_c`, plus `g_c`.
fn collapse_scales(p: &ModelParams) -> Result<(f64, f64, f64)> {
    let gc = critical_coupling_gc(p)?;
    let c = langevin::landau_c(&p.with_g(gc))?;
    if !(c.c6 > 0.0) {
        return Err(Error::InvalidParams(format!("C6 = {:e} must be positive", c.c6)));
    }
    let l = c.c6.powf(-0.5);
    Ok((l, c.c4 * l.powf(4.0 / 3.0), gc))
}

impl ScalingSample {
    /// Derived fields from the raw inputs.
    pub fn new(p: &ModelParams, backend: Backend, dx2: Result<f64>) -> Result<Self> {
        let (l, lambda, gc) = collapse_scales(p)?;
        let l23 = l.powf(2.0 / 3.0);
        let (dx2, status) = match dx2 {
            Ok(v) => (v, SampleStatus::Ok),
            Err(e) => (f64::NAN, SampleStatus::Failed(e.to_string())),
        };
        Ok(ScalingSample {
            omega0: p.omega0,
            mu: p.mu,
            gamma1: p.gamma1,
            eta: p.eta,
            g: p.g,
            gamma2: p.gamma2,
            backend,
            dx2,
            l,
            theta: (p.g - gc).abs() * l23,
            lambda,
            ftilde: dx2 / l23,
            status,
        })
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.omega0, self.eta, self.mu, self.g, self.gamma1, self.gamma2)
    }

    /// Rebuilds the derived fields from the stored raw ones.
    pub fn recompute(&self) -> Result<Self> {
        let dx2 = match &self.status {
            SampleStatus::Ok => Ok(self.dx2),
            SampleStatus::Failed(m) => Err(Error::Config(m.clone())),
        };
        let mut s = Self::new(&self.params()?, self.backend, dx2)?;
        s.status = self.status.clone();
        Ok(s)
    }

    pub fn is_ok(&self) -> bool {
        self.status == SampleStatus::Ok
    }
}

fn sample(p: &ModelParams, backend: Backend, cfg: &BackendConfig) -> Result<ScalingSample> {
    ScalingSample::new(p, backend, delta_x2(p, backend, cfg))
}

fn decades(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let lo = v.clone().fold(f64::INFINITY, f64::min);
    let hi = v.fold(0.0, f64::max);
    (hi / lo).log10()
}

/// Smallest accepted `log₁₀(η_max/η_min)`; admits the desk window 100–800.
pub const MIN_ETA_DECADES: f64 = 0.9;

/// `Δx²(η)` at `g = g_c`.
pub fn finite_size_scan(base: &ModelParams, eta_list: &[f64], backend: Backend, cfg: &BackendConfig) -> Result<Vec<ScalingSample>> {
    if eta_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Config("eta values must be positive".into()));
    }
    if eta_list.len() < 2 || decades(eta_list.iter().copied()) < MIN_ETA_DECADES {
        return Err(Error::Config("eta list must span at least a factor of 8".into()));
    }
    let gc = critical_coupling_gc(base)?;
    eta_list
        .par_iter()
        .map(|&eta| sample(&base.with_eta(eta).with_g(gc), backend, cfg))
        .collect()
}

/// Documented exponents of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub nu: f64,
    pub zeta: f64,
    pub xi: f64,
}

pub const SECOND_ORDER_EXPONENTS: ExponentRow = ExponentRow { nu: 1.0, zeta: 0.5, xi: 2.0 };
pub const TRICRITICAL_EXPONENTS: ExponentRow = ExponentRow { nu: 1.0, zeta: 2.0 / 3.0, xi: 1.5 };

/// Table row for the sign of `C₄` (zero within `tol`).
pub fn documented_exponents(c4: f64, tol: f64) -> ExponentRow {
    if c4.abs() <= tol {
        TRICRITICAL_EXPONENTS
    } else {
        SECOND_ORDER_EXPONENTS
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Eta,
    G,
    /// `|g − g_c|`.
    DeltaG,
    Dx2,
    L,
    Theta,
    Lambda,
    Ftilde,
}

impl Field {
    pub fn get(self, s: &ScalingSample) -> f64 {
        match self {
            Field::Eta => s.eta,
            Field::G => s.g,
            Field::DeltaG => s.params().and_then(|p| critical_coupling_gc(&p)).map(|gc| (s.g - gc).abs()).unwrap_or(f64::NAN),
            Field::Dx2 => s.dx2,
            Field::L => s.l,
            Field::Theta => s.theta,
            Field::Lambda => s.lambda,
            Field::Ftilde => s.ftilde,
        }
    }
}

/// Least-squares line in log-log space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub samples_used: usize,
    /// Physical exponent read off the slope (`ζ = slope`, `ν = −slope`).
    pub exponent: f64,
    pub documented: Option<ExponentRow>,
}

/// OLS fit of `ln y` against `ln x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<ScalingReport> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::ShapeMismatch("x and y lengths differ".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveData);
    }
    if n < 5 {
        return Err(Error::InsufficientData { needed: 5, got: n });
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingReport {
        slope,
        intercept,
        slope_stderr: (ssr / (n as f64 - 2.0) / sxx).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 },
        samples_used: n,
        exponent: slope,
        documented: None,
    })
}

/// Fits `y_field` against `x_field` over the successful samples.
pub fn fit_exponent(samples: &[ScalingSample], x_field: Field, y_field: Field) -> Result<ScalingReport> {
    let ok: Vec<&ScalingSample> = samples.iter().filter(|s| s.is_ok()).collect();
    let xs: Vec<f64> = ok.iter().map(|s| x_field.get(s)).collect();
    let ys: Vec<f64> = ok.iter().map(|s| y_field.get(s)).collect();
    fit_loglog(&xs, &ys)
}

/// `ν` from `Δx² ∝ |g − g_c|^{−ν}` at fixed `η`.
pub fn critical_exponent_scan(
    base: &ModelParams,
    g_list: &[f64],
    backend: Backend,
    cfg: &BackendConfig,
) -> Result<(ScalingReport, Vec<ScalingSample>)> {
    let gc = critical_coupling_gc(base)?;
    let dg: Vec<f64> = g_list.iter().map(|g| (g - gc).abs()).collect();
    if dg.iter().any(|&d| d == 0.0) {
        return Err(Error::Config("g list must avoid g_c".into()));
    }
    if decades(dg.iter().copied()) < 2.0 - 1e-9 {
        return Err(Error::Config("|g - g_c| must span at least two decades".into()));
    }
    let samples: Vec<ScalingSample> = g_list
        .par_iter()
        .map(|&g| sample(&base.with_g(g), backend, cfg))
        .collect::<Result<_>>()?;
    let mut rep = fit_exponent(&samples, Field::DeltaG, Field::Dx2)?;
    rep.exponent = -rep.slope;
    let c4 = langevin::landau_c(&base.with_g(gc))?.c4;
    rep.documented = Some(documented_exponents(c4, 1e-12));
    Ok((rep, samples))
}

/// `ζ` from a finite-size scan.
pub fn zeta_report(samples: &[ScalingSample]) -> Result<ScalingReport> {
    let mut rep = fit_exponent(samples, Field::Eta, Field::Dx2)?;
    if let Some(s) = samples.first() {
        let p = s.params()?;
        let c4 = langevin::landau_c(&p.with_g(critical_coupling_gc(&p)?))?.c4;
        rep.documented = Some(documented_exponents(c4, 1e-12));
    }
    Ok(rep)
}

/// `Λ(γ₂)` at `g = g_c`.
pub fn lambda_of_gamma2(base: &ModelParams, gamma2: f64) -> Result<f64> {
    Ok(collapse_scales(&base.with_gamma2(gamma2))?.1)
}

/// `γ₂` with `Λ(γ₂) = target` at `g = g_c`, nearest the `C₄ = 0` point.
pub fn solve_gamma2_for_lambda(target: f64, eta: f64, base: &ModelParams) -> Result<f64> {
    const GAMMA2_MAX: f64 = 1e6;
    let p = base.with_eta(eta);
    let gc = critical_coupling_gc(&p)?;
    let p = p.with_g(gc);
    let g0 = langevin::langevin_tricritical_gamma2(&p)?;
    let f = |g2: f64| lambda_of_gamma2(&p, g2).map(|l| l - target);
    let tol = 1e-10 * target.abs().max(1.0);
    let f0 = f(g0)?;
    if f0.abs() <= tol {
        return Ok(g0);
    }
    // Λ rises through zero at g0, so the sign of the target picks the side
    let (mut lo, mut hi) = (g0, g0);
    if target > 0.0 {
        loop {
            hi *= 1.5;
            if hi > GAMMA2_MAX {
                return Err(Error::NoBracket);
            }
            if f(hi)? >= 0.0 {
                break;
            }
            lo = hi;
        }
    } else {
        loop {
            lo /= 1.5;
            if lo < 1e-14 * g0 {
                if f(0.0)? <= 0.0 {
                    lo = 0.0;
                    break;
                }
                return Err(Error::NoBracket);
            }
            if f(lo)? <= 0.0 {
                break;
            }
            hi = lo;
        }
    }
    let root = brent(|g2| f(g2).unwrap_or(f64::NAN), lo, hi, 1e-15 * hi.max(1.0), 200)?;
    let res = f(root)?.abs();
    if res > tol {
        return Err(Error::NoConvergence { lo, hi, iterations: 200 });
    }
    Ok(root)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseSampling {
    /// Fixed `g − g_c` offsets for every `η`.
    DeltaG(Vec<f64>),
    /// Offsets chosen per `η` to hit these `Θ` values.
    Theta(Vec<f64>),
}

/// Samples of `F̃(Θ)` at fixed `Λ` for each `(Λ, η, offset)`.
pub fn collapse_dataset(
    base: &ModelParams,
    lambda_list: &[f64],
    eta_list: &[f64],
    sampling: &CollapseSampling,
    backend: Backend,
    cfg: &BackendConfig,
) -> Result<Vec<ScalingSample>> {
    let mut tasks = Vec::new();
    for &lam in lambda_list {
        for &eta in eta_list {
            let g2 = solve_gamma2_for_lambda(lam, eta, base)?;
            let p = base.with_eta(eta).with_gamma2(g2);
            let gc = critical_coupling_gc(&p)?;
            let (l, _, _) = collapse_scales(&p)?;
            let offsets: Vec<f64> = match sampling {
                CollapseSampling::DeltaG(d) => d.clone(),
                CollapseSampling::Theta(t) => t.iter().map(|th| th / l.powf(2.0 / 3.0)).collect(),
            };
            // the normal phase of the inverted regime lies above g_c
            let dir = if p.mu > 1.0 { 1.0 } else { -1.0 };
            tasks.extend(offsets.into_iter().map(|d| p.with_g(gc + dir * d)));
        }
    }
    tasks.par_iter().map(|p| sample(p, backend, cfg)).collect()
}

/// Spread of `F̃` among samples sharing a `Λ` and a `Θ` bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSpread {
    pub lambda: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub count: usize,
    /// `(max − min)/mean` of `F̃` in the bin.
    pub spread: f64,
}

/// Groups successful samples by `Λ` (to `lambda_tol`) and 20 log-spaced `Θ`
/// bins; bins with fewer than two samples are skipped.
pub fn collapse_spread(samples: &[ScalingSample], lambda_tol: f64) -> Vec<BinSpread> {
    let ok: Vec<&ScalingSample> = samples.iter().filter(|s| s.is_ok() && s.theta > 0.0).collect();
    if ok.is_empty() {
        return Vec::new();
    }
    let lo = ok.iter().map(|s| s.theta).fold(f64::INFINITY, f64::min);
    let hi = ok.iter().map(|s| s.theta).fold(0.0, f64::max).max(lo * (1.0 + 1e-9));
    // bin centres sit on a log grid from lo to hi so Θ-targeted samples never straddle an edge
    let half = ((hi / lo).ln() / 38.0).exp();
    let edges = geomspace(lo / half, hi * half, 21);
    let mut lambdas: Vec<f64> = Vec::new();
    for s in &ok {
        if !lambdas.iter().any(|l| (l - s.lambda).abs() <= lambda_tol * l.abs().max(1.0)) {
            lambdas.push(s.lambda);
        }
    }
    let mut out = Vec::new();
    for &lam in &lambdas {
        for w in edges.windows(2) {
            let f: Vec<f64> = ok
                .iter()
                .filter(|s| (s.lambda - lam).abs() <= lambda_tol * lam.abs().max(1.0))
                .filter(|s| s.theta >= w[0] && s.theta < w[1])
                .map(|s| s.ftilde)
                .collect();
            if f.len() < 2 {
                continue;
            }
            let mean = f.iter().sum::<f64>() / f.len() as f64;
            let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = f.iter().copied().fold(f64::INFINITY, f64::min);
            out.push(BinSpread { lambda: lam, theta_lo: w[0], theta_hi: w[1], count: f.len(), spread: (max - min) / mean });
        }
    }
    out
}

/// Writes `eta,g,gamma2,backend,dx2,L,Theta,Lambda,Ftilde,status`.
pub fn write_samples_csv(samples: &[ScalingSample], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["eta", "g", "gamma2", "backend", "dx2", "L", "Theta", "Lambda", "Ftilde", "status"])
        .map_err(io_err)?;
    for s in samples {
        let status = match &s.status {
            SampleStatus::Ok => "ok".to_string(),
            SampleStatus::Failed(m) => format!("failed: {m}"),
        };
        w.write_record([
            s.eta.to_string(),
            s.g.to_string(),
            s.gamma2.to_string(),
            s.backend.label().to_string(),
            s.dx2.to_string(),
            s.l.to_string(),
            s.theta.to_string(),
            s.lambda.to_string(),
            s.ftilde.to_string(),
            status,
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_samples_csv(samples: &[ScalingSample], path: &Path) -> Result<()> {
    io::write_atomic(path, |f| write_samples_csv(samples, f))
}

#[cfg(test)]
mod tests;

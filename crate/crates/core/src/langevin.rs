//! Semiclassical Langevin description of a single branch: the Boltzmann
//! steady state in `(x, v)`, its moments, and a stochastic ensemble of the
//! full `(x, p)` equations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::params::{Branch, ModelParams};
use crate::quad;
use crate::roots::linspace;

/// Window edge: `U(x_max) − U_min` exceeds this many temperatures.
const WINDOW_TEMPERATURES: f64 = 40.0;
const ESCAPE_RADIUS: f64 = 1e6;

/// Coefficients of `U ≈ Σ (ω₀²/2k) C_{2k} x^{2k}` and the effective
/// temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectivePotentialParams {
    pub c2: f64,
    pub c4: f64,
    pub c6: f64,
    /// `(μ−1)²/4`, in units of `ω₀²`.
    pub t_eff: f64,
    pub m: f64,
}

/// Sign of `V_nl` in the branch potential: `+` on the (−) branch.
fn vnl_sign(b: Branch) -> f64 {
    -b.sign()
}

/// Landau coefficients of the (−) branch.
pub fn landau_c(p: &ModelParams) -> Result<EffectivePotentialParams> {
    landau_c_branch(p, Branch::Minus)
}

/// Landau coefficients of either branch; the (+) branch flips `V_nl`.
pub fn landau_c_branch(p: &ModelParams, b: Branch) -> Result<EffectivePotentialParams> {
    if p.mu == 1.0 {
        return Err(Error::DegenerateMu);
    }
    let s = vnl_sign(b);
    let (m1, g2) = (p.mu - 1.0, p.g * p.g);
    Ok(EffectivePotentialParams {
        c2: 1.0 - p.mu * p.mu + p.gamma1 * p.gamma1 + s * m1 * g2,
        c4: (2.0 * p.gamma1 * p.gamma2 - s * m1 * g2 * g2) / p.eta,
        c6: (p.gamma2 * p.gamma2 + s * 1.5 * m1 * g2 * g2 * g2) / (p.eta * p.eta),
        t_eff: 0.25 * m1 * m1,
        m: 1.0,
    })
}

/// `γ₂` that cancels `C₄` at the current `g`: `(μ−1)g⁴/(2γ₁)`.
///
/// Differs from the mean-field tricritical rate by `(2μ−g²)/(μ−1)`.
pub fn langevin_tricritical_gamma2(p: &ModelParams) -> Result<f64> {
    if p.gamma1 == 0.0 {
        return Err(Error::InvalidParams("gamma1 must be nonzero".into()));
    }
    Ok((p.mu - 1.0) * p.g.powi(4) / (2.0 * p.gamma1))
}

/// Predicted `Δx²/Δp² ≈ (1−μ)²/γ₁²` when linear dissipation is weak.
pub fn mass_ratio_estimate(p: &ModelParams) -> f64 {
    (1.0 - p.mu).powi(2) / (p.gamma1 * p.gamma1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialForm {
    /// Keeps the full `V_nl`.
    Exact,
    /// Truncated at `x⁶`.
    Sextic,
}

/// `U(x)`, shifted so that `U(0) = 0`.
pub fn effective_potential_u(x: f64, p: &ModelParams, b: Branch, form: PotentialForm) -> f64 {
    let w2 = p.omega0 * p.omega0;
    let x2 = x * x;
    match form {
        PotentialForm::Exact => {
            let (g1, g2) = (p.gamma1, p.gamma2);
            let y = 2.0 * p.g * p.g * x2 / p.eta;
            // √(1+y) − 1 without cancellation
            let vnl = 0.5 * p.omega0 * p.eta * y / ((1.0 + y).sqrt() + 1.0);
            0.5 * w2 * (1.0 - p.mu * p.mu + g1 * g1) * x2
                + w2 / (2.0 * p.eta) * g1 * g2 * x2 * x2
                + (p.omega0 * g2).powi(2) * x2 * x2 * x2 / (6.0 * p.eta * p.eta)
                + vnl_sign(b) * p.omega0 * (p.mu - 1.0) * vnl
        }
        PotentialForm::Sextic => {
            let c = landau_c_branch(p, b).unwrap_or(EffectivePotentialParams {
                c2: 0.0,
                c4: 0.0,
                c6: 0.0,
                t_eff: 0.0,
                m: 1.0,
            });
            w2 * (0.5 * c.c2 * x2 + 0.25 * c.c4 * x2 * x2 + c.c6 * x2 * x2 * x2 / 6.0)
        }
    }
}

/// `U′(x)`.
pub fn effective_potential_du(x: f64, p: &ModelParams, b: Branch, form: PotentialForm) -> f64 {
    let w2 = p.omega0 * p.omega0;
    let x2 = x * x;
    match form {
        PotentialForm::Exact => {
            let (g1, g2) = (p.gamma1, p.gamma2);
            let dvnl = p.omega0 * p.g * p.g * x / (2.0 * p.g * p.g * x2 / p.eta + 1.0).sqrt();
            w2 * (1.0 - p.mu * p.mu + g1 * g1) * x
                + 2.0 * w2 / p.eta * g1 * g2 * x2 * x
                + (p.omega0 * g2).powi(2) * x2 * x2 * x / (p.eta * p.eta)
                + vnl_sign(b) * p.omega0 * (p.mu - 1.0) * dvnl
        }
        PotentialForm::Sextic => match landau_c_branch(p, b) {
            Ok(c) => w2 * (c.c2 * x + c.c4 * x2 * x + c.c6 * x2 * x2 * x),
            Err(_) => 0.0,
        },
    }
}

/// `v = −ω₀(μ−1)p − κ₁x − κ₂x³`.
pub fn velocity(x: f64, p_coord: f64, p: &ModelParams) -> f64 {
    let r = p.raw_rates();
    -p.omega0 * (p.mu - 1.0) * p_coord - r.kappa1 * x - r.kappa2 * x * x * x
}

/// Normalized Boltzmann steady state `W ∝ exp[−(v²/2 + U)/T]` of one branch.
///
/// The temperature carries the `ω₀²` of `U`, so `T = ω₀²(μ−1)²/4`.
/// `W` integrates to one over `(x, p)`, `W_R` over `x`.
#[derive(Clone, Debug)]
pub struct Boltzmann {
    pub params: ModelParams,
    pub branch: Branch,
    pub form: PotentialForm,
    pub temperature: f64,
    pub u_min: f64,
    pub x_max: f64,
    /// Positive minima of `U` on the window (or `0`).
    pub minima: Vec<f64>,
    z_reduced: f64,
}

impl Boltzmann {
    pub fn new(p: &ModelParams, b: Branch, form: PotentialForm) -> Result<Self> {
        if p.mu == 1.0 {
            return Err(Error::DegenerateMu);
        }
        let t = p.omega0 * p.omega0 * 0.25 * (p.mu - 1.0).powi(2);
        let u = |x: f64| effective_potential_u(x, p, b, form);

        // outward search for a confining edge
        let mut x = 1e-3;
        let mut u_min = 0.0f64;
        let x_max = loop {
            if x > 1e9 {
                return Err(Error::NormalizationOverflow);
            }
            let ux = u(x);
            if !ux.is_finite() {
                return Err(Error::NormalizationOverflow);
            }
            u_min = u_min.min(ux);
            if ux - u_min > WINDOW_TEMPERATURES * t && effective_potential_du(x, p, b, form) > 0.0 {
                break x;
            }
            x *= 1.25;
        };
        let grid = linspace(0.0, x_max, 4001);
        let vals: Vec<f64> = grid.iter().map(|&x| u(x)).collect();
        let mut minima = Vec::new();
        for i in 1..grid.len() - 1 {
            if vals[i] < vals[i - 1] && vals[i] <= vals[i + 1] {
                minima.push(grid[i]);
            }
        }
        let u_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut bz = Boltzmann {
            params: *p,
            branch: b,
            form,
            temperature: t,
            u_min,
            x_max,
            minima,
            z_reduced: 1.0,
        };
        let z = bz.integrate(|x| bz.unnormalized(x));
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::NormalizationOverflow);
        }
        bz.z_reduced = z;
        Ok(bz)
    }

    fn unnormalized(&self, x: f64) -> f64 {
        let u = effective_potential_u(x, &self.params, self.branch, self.form);
        (-(u - self.u_min) / self.temperature).exp()
    }

    fn breaks(&self) -> Vec<f64> {
        let mut br = linspace(-self.x_max, self.x_max, 65);
        for &m in &self.minima {
            br.push(m);
            br.push(-m);
        }
        br.sort_by(f64::total_cmp);
        br.dedup();
        br
    }

    /// `∫ f` over the window.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        quad::integrate_pieces(&f, &self.breaks(), 0.0, 1e-13).value
    }

    /// `W_R(x)`.
    pub fn reduced(&self, x: f64) -> f64 {
        self.unnormalized(x) / self.z_reduced
    }

    /// `W(x, p)`.
    pub fn wigner(&self, x: f64, p_coord: f64) -> f64 {
        let p = &self.params;
        let v = velocity(x, p_coord, p);
        let jac = p.omega0 * (p.mu - 1.0).abs() / (2.0 * std::f64::consts::PI * self.temperature).sqrt();
        self.reduced(x) * jac * (-0.5 * v * v / self.temperature).exp()
    }

    /// `⟨f(x)⟩` under `W_R`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate(|x| f(x) * self.reduced(x))
    }

    /// Symmetric-ordered `⟨p^k x^m⟩`, `k ≤ 2`.
    ///
    /// Uses `(i/2√2)^k H_k(iy)` with `y = √2(γ₁x + γ₂x³/η)/(μ−1)`, which is
    /// real: `1`, `−y/√2`, `y²/2 + 1/4`.
    pub fn moment(&self, k: u32, m: u32) -> Result<f64> {
        let p = &self.params;
        let y = |x: f64| 2f64.sqrt() * (p.gamma1 * x + p.gamma2 * x * x * x / p.eta) / (p.mu - 1.0);
        let hk: Box<dyn Fn(f64) -> f64 + '_> = match k {
            0 => Box::new(|_| 1.0),
            1 => Box::new(move |x| -y(x) / 2f64.sqrt()),
            2 => Box::new(move |x| 0.5 * y(x).powi(2) + 0.25),
            _ => return Err(Error::UnsupportedMoment(k)),
        };
        Ok(self.expect(|x| x.powi(m as i32) * hk(x)))
    }

    /// Relative residual of the stationary Fokker–Planck equation in
    /// `(x, v)`, by finite differences on the given grid.
    ///
    /// Generator: `−v∂ₓW + ∂ᵥ[(U′ + 2Γv)W] + 2TΓ∂ᵥ²W`, `Γ = κ₁ + 2κ₂x²`.
    pub fn fokker_planck_residual(&self, xs: &[f64], vs: &[f64]) -> f64 {
        let r = self.params.raw_rates();
        let t = self.temperature;
        let w = |x: f64, v: f64| self.unnormalized(x) * (-0.5 * v * v / t).exp();
        let du = |x: f64| effective_potential_du(x, &self.params, self.branch, self.form);
        let d1 = |f: &dyn Fn(f64) -> f64, z: f64, h: f64| {
            (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h)
        };
        let d2 = |f: &dyn Fn(f64) -> f64, z: f64, h: f64| {
            (-f(z - 2.0 * h) + 16.0 * f(z - h) - 30.0 * f(z) + 16.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h * h)
        };
        let hx = 1e-3 * self.x_max.max(1e-3) / WINDOW_TEMPERATURES.sqrt();
        let hv = 1e-3 * t.sqrt();
        let mut worst = 0.0f64;
        for &x in xs {
            let gam = r.kappa1 + 2.0 * r.kappa2 * x * x;
            for &v in vs {
                let a = -v * d1(&|z| w(z, v), x, hx);
                let b = d1(&|z| (du(x) + 2.0 * gam * z) * w(x, z), v, hv);
                let c = 2.0 * t * gam * d2(&|z| w(x, z), v, hv);
                let scale = a.abs() + b.abs() + c.abs();
                if scale > 0.0 {
                    worst = worst.max((a + b + c).abs() / scale);
                }
            }
        }
        worst
    }
}

/// `W(x, p)` of the given branch with the exact potential.
pub fn boltzmann_wigner(x: f64, p_coord: f64, p: &ModelParams, b: Branch) -> Result<f64> {
    Ok(Boltzmann::new(p, b, PotentialForm::Exact)?.wigner(x, p_coord))
}

/// `W_R(x)` of the (−) branch with the exact potential.
pub fn reduced_wigner(x: f64, p: &ModelParams) -> Result<f64> {
    Ok(Boltzmann::new(p, Branch::Minus, PotentialForm::Exact)?.reduced(x))
}

/// `⟨p^k x^m⟩` for each `(k, m)` by quadrature over `W_R`.
pub fn moments_quadrature(p: &ModelParams, b: Branch, form: PotentialForm, moments: &[(u32, u32)]) -> Result<Vec<f64>> {
    if let Some(&(k, _)) = moments.iter().find(|(k, _)| *k > 2) {
        return Err(Error::UnsupportedMoment(k));
    }
    let bz = Boltzmann::new(p, b, form)?;
    moments.iter().map(|&(k, m)| bz.moment(k, m)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `g ≳ g_c` with `C₂` dominant.
    NearCritical,
    /// `g = g_c`, `C₄ > 0`.
    QuarticCritical,
    /// `g = g_c`, `C₄ = 0`.
    TricriticalPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormMoments {
    pub regime: Regime,
    pub x2: f64,
    pub p2: f64,
    pub n: f64,
    /// Regime-violation notes; empty when the ordering assumptions hold.
    pub diagnostics: Vec<String>,
}

/// Leading-order moments of the (−) branch Boltzmann state.
///
/// Errors when the regime formula has no meaning (e.g. `C₄ ≤ 0` for the
/// quartic form); weaker violations are reported as diagnostics.
pub fn closed_form_moments(p: &ModelParams, regime: Regime) -> Result<ClosedFormMoments> {
    let c = landau_c(p)?;
    let t = c.t_eff;
    let q = p.gamma1 * p.gamma1 / (p.mu - 1.0).powi(2);
    let mut diag = Vec::new();
    let (x2, p2, n) = match regime {
        Regime::NearCritical => {
            let gc2 = (p.mu * p.mu - 1.0 - p.gamma1 * p.gamma1) / (p.mu - 1.0);
            let dg = p.g * p.g - gc2;
            if dg <= 0.0 {
                return Err(Error::RegimeViolation(format!("g² − g_c² = {dg:e} must be positive")));
            }
            let x2 = (p.mu - 1.0) / (4.0 * dg);
            if c.c2 <= 0.0 {
                return Err(Error::RegimeViolation(format!("C₂ = {:e} must be positive", c.c2)));
            }
            let quartic = c.c4.abs() * x2 / (2.0 * c.c2);
            if quartic > 0.1 {
                diag.push(format!("C₂ not dominant: |C₄|⟨x²⟩/(2C₂) = {quartic:.3}"));
            }
            (x2, 0.25, 0.5 * x2 - 0.375)
        }
        Regime::QuarticCritical => {
            if c.c4 <= 0.0 {
                return Err(Error::RegimeViolation(format!("C₄ = {:e} must be positive", c.c4)));
            }
            let beta1 = c.c4 / (4.0 * t);
            let x2 = gamma(0.75) / gamma(0.25) / beta1.sqrt();
            let off = 2.0 * c.c2.abs() / (c.c4 * x2);
            if off > 0.1 {
                diag.push(format!("C₂ not negligible: 2|C₂|/(C₄⟨x²⟩) = {off:.3}"));
            }
            let sext = 2.0 * c.c6.abs() * x2 / (3.0 * c.c4);
            if sext > 0.1 {
                diag.push(format!("C₆ not negligible: 2|C₆|⟨x²⟩/(3C₄) = {sext:.3}"));
            }
            (x2, q * x2 + 0.5, 0.5 * (1.0 + q) * x2 - 0.25)
        }
        Regime::TricriticalPoint => {
            if c.c6 <= 0.0 {
                return Err(Error::RegimeViolation(format!("C₆ = {:e} must be positive", c.c6)));
            }
            let beta2 = c.c6 / (6.0 * t);
            let x2 = std::f64::consts::PI.sqrt() / gamma(1.0 / 6.0) * beta2.powf(-1.0 / 3.0);
            let lower = (c.c2.abs() * 3.0 / x2.powi(2) + c.c4.abs() * 1.5 / x2) / c.c6;
            if lower > 0.1 {
                diag.push(format!("C₂, C₄ not negligible against C₆: {lower:.3}"));
            }
            (x2, 0.5, 0.5 * x2 - 0.25)
        }
    };
    if p.gamma1 * p.gamma1 > 0.01 * (p.mu - 1.0).powi(2) {
        diag.push(format!("weak linear dissipation violated: γ₁²/(μ−1)² = {q:.3}"));
    }
    Ok(ClosedFormMoments { regime, x2, p2, n, diagnostics: diag })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    /// Time step; `None` picks [`default_dt`].
    pub dt: Option<f64>,
    pub t_burn: f64,
    pub t_max: f64,
    pub seed: u64,
    pub x0: f64,
    pub p0: f64,
    pub noise: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { n_traj: 32, dt: None, t_burn: 200.0, t_max: 2000.0, seed: 0, x0: 0.0, p0: 0.0, noise: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl MomentEstimate {
    /// `|mean − target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_traj: usize,
    pub dt: f64,
    pub t_burn: f64,
    pub t_max: f64,
    pub seed: u64,
    pub x2: MomentEstimate,
    pub p2: MomentEstimate,
    pub x4: MomentEstimate,
}

/// `0.005 / max(ω₀(1+|μ|), κ₁ + κ₂⟨x²⟩)` with `⟨x²⟩` from the Boltzmann
/// state when it exists.
pub fn default_dt(p: &ModelParams, b: Branch) -> f64 {
    let r = p.raw_rates();
    let x2 = Boltzmann::new(p, b, PotentialForm::Exact)
        .and_then(|bz| bz.moment(0, 2))
        .unwrap_or(1.0);
    0.005 / (p.omega0 * (1.0 + p.mu.abs())).max(r.kappa1 + r.kappa2 * x2)
}

/// Deterministic drift of the `(x, p)` equations.
pub fn drift(x: f64, pc: f64, p: &ModelParams, b: Branch) -> (f64, f64) {
    let r = p.raw_rates();
    let r2 = x * x + pc * pc;
    let dvnl = p.omega0 * p.g * p.g * x / (2.0 * p.g * p.g * x * x / p.eta + 1.0).sqrt();
    (
        -p.omega0 * (p.mu - 1.0) * pc - r.kappa1 * x - r.kappa2 * r2 * x,
        -p.omega0 * (p.mu + 1.0) * x + vnl_sign(b) * dvnl - r.kappa1 * pc - r.kappa2 * r2 * pc,
    )
}

/// One Euler–Maruyama (Itô) step driven by the increments
/// `[dW₁ₓ, dW₁ₚ, dW₂ₓ, dW₂ₚ]`.
pub fn em_step(x: f64, pc: f64, p: &ModelParams, b: Branch, dt: f64, dw: [f64; 4]) -> (f64, f64) {
    let r = p.raw_rates();
    let (fx, fp) = drift(x, pc, p, b);
    let (s1, s2) = (r.kappa1.sqrt(), (2.0 * r.kappa2).sqrt());
    let [w1x, w1p, w2x, w2p] = dw;
    (
        x + fx * dt + s1 * w1p + s2 * (x * w2p - pc * w2x),
        pc + fp * dt - s1 * w1x - s2 * (x * w2x + pc * w2p),
    )
}

/// Time averages of `(x², p², x⁴)` along one trajectory.
fn run_trajectory(p: &ModelParams, b: Branch, cfg: &EnsembleConfig, dt: f64, index: u64) -> Result<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let sq = dt.sqrt();
    let n_burn = (cfg.t_burn / dt).round() as usize;
    let n_run = ((cfg.t_max / dt).round() as usize).max(1);
    let (mut x, mut pc) = (cfg.x0, cfg.p0);
    let mut acc = [0.0; 3];
    for step in 0..n_burn + n_run {
        let dw = if cfg.noise {
            let mut d = [0.0; 4];
            for v in &mut d {
                *v = sq * rng.sample::<f64, _>(StandardNormal);
            }
            d
        } else {
            [0.0; 4]
        };
        (x, pc) = em_step(x, pc, p, b, dt, dw);
        if !(x.abs() <= ESCAPE_RADIUS) {
            return Err(Error::Unstable(x.abs()));
        }
        if step >= n_burn {
            let x2 = x * x;
            acc[0] += x2;
            acc[1] += pc * pc;
            acc[2] += x2 * x2;
        }
    }
    Ok(acc.map(|s| s / n_run as f64))
}

fn estimate(values: impl Iterator<Item = f64> + Clone, n: usize) -> MomentEstimate {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    MomentEstimate { mean, stderr: (var / n as f64).sqrt() }
}

/// Ensemble of independent trajectories; each trajectory's time average is
/// one batch mean. Deterministic in `cfg.seed`.
pub fn simulate_ensemble(p: &ModelParams, b: Branch, cfg: &EnsembleConfig) -> Result<EnsembleStats> {
    if cfg.n_traj < 16 {
        return Err(Error::InsufficientData { needed: 16, got: cfg.n_traj });
    }
    if p.is_inverted() && p.gamma2 == 0.0 {
        return Err(Error::RegimeViolation("the inverted regime needs gamma2 > 0".into()));
    }
    let dt = cfg.dt.unwrap_or_else(|| default_dt(p, b));
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt = {dt}")));
    }
    let runs: Vec<[f64; 3]> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|i| run_trajectory(p, b, cfg, dt, i))
        .collect::<Result<_>>()?;
    let n = runs.len();
    let col = |k: usize| runs.iter().map(move |r| r[k]);
    Ok(EnsembleStats {
        n_traj: n,
        dt,
        t_burn: cfg.t_burn,
        t_max: cfg.t_max,
        seed: cfg.seed,
        x2: estimate(col(0), n),
        p2: estimate(col(1), n),
        x4: estimate(col(2), n),
    })
}

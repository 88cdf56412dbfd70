//! Thermodynamic-limit fixed points, Landau coefficients, phase
//! classification and critical lines.

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Branch, ModelParams};
use crate::quad;
use crate::roots::{brent, geomspace, sign_changes};

/// Normalized boson quadratures and spin expectations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub xbar: f64,
    pub pbar: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl MeanFieldState {
    pub fn trivial(b: Branch) -> Self {
        MeanFieldState { xbar: 0.0, pbar: 0.0, sx: 0.0, sy: 0.0, sz: b.sign() }
    }

    pub fn n_mf(&self) -> f64 {
        0.5 * (self.xbar * self.xbar + self.pbar * self.pbar)
    }

    pub fn spin_norm_sq(&self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }

    pub fn max_abs(&self) -> f64 {
        [self.xbar, self.pbar, self.sx, self.sy, self.sz]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPoint {
    pub state: MeanFieldState,
    pub stable: bool,
    /// Eigenvalues of the full four-variable Jacobian, as `(re, im)`.
    pub jacobian_eigenvalues: Vec<(f64, f64)>,
    pub jacobian_det: f64,
    /// Eigenvalues of the boson Jacobian with the spin slaved to `x̄`.
    /// These decide `stable`.
    pub slow_eigenvalues: Vec<(f64, f64)>,
    pub n_mf: f64,
    /// `u_x = x̄²` of the root this point was lifted from (0 for trivial).
    pub u: f64,
}

impl FixedPoint {
    /// A point with no stability data yet; see [`stability`].
    pub fn unannotated(state: MeanFieldState, u: f64) -> Self {
        FixedPoint {
            n_mf: state.n_mf(),
            state,
            stable: false,
            jacobian_eigenvalues: Vec::new(),
            jacobian_det: f64::NAN,
            slow_eigenvalues: Vec::new(),
            u,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.u == 0.0
    }
}

/// Time derivatives of the thermodynamic-limit Heisenberg equations.
/// Boson rates carry ω₀, spin rates carry Ω = ηω₀.
pub fn mf_rhs(s: &MeanFieldState, p: &ModelParams) -> MeanFieldState {
    let w0 = p.omega0;
    let big = p.eta * p.omega0;
    let r2 = s.xbar * s.xbar + s.pbar * s.pbar;
    let sq2 = std::f64::consts::SQRT_2;
    MeanFieldState {
        xbar: w0 * ((1.0 - p.mu) * s.pbar - p.gamma1 * s.xbar - p.gamma2 * r2 * s.xbar),
        pbar: w0
            * (-(1.0 + p.mu) * s.xbar - p.g / sq2 * s.sx - p.gamma1 * s.pbar - p.gamma2 * r2 * s.pbar),
        sx: -big * s.sy,
        sy: big * (s.sx - sq2 * p.g * s.xbar * s.sz),
        sz: big * sq2 * p.g * s.xbar * s.sy,
    }
}

/// `(2g²u+1)^{-1/2}`.
fn spin_factor(u: f64, g: f64) -> f64 {
    (2.0 * g * g * u + 1.0).powf(-0.5)
}

/// `h(u)/u` for branch `b`: `(γ₁+γ₂(u+u_p))² − (1−μ)²u_p/u`.
/// Its zeros with `u > 0` are the nontrivial fixed points; its value at 0 is `c₂`.
pub fn h_reduced(u: f64, p: &ModelParams, b: Branch) -> f64 {
    let a = -(1.0 + p.mu) - b.sign() * p.g * p.g * spin_factor(u, p.g);
    let one_m = 1.0 - p.mu;
    let d = p.gamma1 + p.gamma2 * u * (1.0 + a / one_m);
    d * d - one_m * a
}

/// `h(u_x)` itself.
pub fn h_full(u: f64, p: &ModelParams, b: Branch) -> f64 {
    u * h_reduced(u, p, b)
}

/// `u_p = p̄²` slaved to `u_x` on branch `b`.
pub fn u_p(u: f64, p: &ModelParams, b: Branch) -> f64 {
    let a = -(1.0 + p.mu) - b.sign() * p.g * p.g * spin_factor(u, p.g);
    u * a / (1.0 - p.mu)
}

/// Bracketing grid for the roots of `h(u)/u`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RootGrid {
    pub points: usize,
    pub u_min: f64,
    pub u_max_scale: f64,
}

impl Default for RootGrid {
    fn default() -> Self {
        RootGrid { points: 400, u_min: 1e-8, u_max_scale: 1e3 }
    }
}

impl RootGrid {
    fn grid(&self, g: f64) -> Vec<f64> {
        let hi = self.u_max_scale * if g > 0.0 { (1.0 / (g * g)).max(1.0) } else { 1.0 };
        geomspace(self.u_min, hi, self.points)
    }
}

/// Positive roots of `h(u)/u`, polished to `|h| < 1e-12·scale`.
pub fn nontrivial_roots(p: &ModelParams, b: Branch, grid: &RootGrid) -> Result<Vec<f64>> {
    if p.mu == 1.0 {
        // h(u)/u = D² ≥ 0 with D = γ₁ at μ = 1
        return Ok(Vec::new());
    }
    let us = grid.grid(p.g);
    let vals: Vec<f64> = us.iter().map(|&u| h_reduced(u, p, b)).collect();
    let mut roots = Vec::new();
    for (lo, hi) in sign_changes(&us, &vals) {
        let f = |u: f64| h_reduced(u, p, b);
        let u = brent(f, lo, hi, 1e-15 * hi, 200).map_err(|e| match e {
            Error::NoBracket => Error::NoConvergence { lo, hi, iterations: 0 },
            other => other,
        })?;
        let scale = 1.0 + p.gamma1.powi(2) + (1.0 - p.mu).abs() * (1.0 + p.mu.abs() + p.g * p.g)
            + (p.gamma2 * (1.0 + u)).powi(2);
        if h_reduced(u, p, b).abs() > 1e-12 * scale * 1e3 {
            return Err(Error::NoConvergence { lo, hi, iterations: 200 });
        }
        if roots.last().map_or(true, |&r: &f64| (u - r).abs() > 1e-12 * u) {
            roots.push(u);
        }
    }
    Ok(roots)
}

fn lift(u: f64, sign_x: f64, p: &ModelParams, b: Branch) -> MeanFieldState {
    let x = sign_x * u.sqrt();
    let up = u_p(u, p, b).max(0.0);
    let d = p.gamma1 + p.gamma2 * (u + up);
    let pb = d * x / (1.0 - p.mu);
    let sz = b.sign() * spin_factor(u, p.g);
    MeanFieldState {
        xbar: x,
        pbar: pb,
        sx: std::f64::consts::SQRT_2 * p.g * x * sz,
        sy: 0.0,
        sz,
    }
}

/// Trivial fixed point followed by `±x̄` pairs for every nontrivial root,
/// each annotated with its linear stability.
pub fn fixed_points(p: &ModelParams, b: Branch, grid: &RootGrid) -> Result<Vec<FixedPoint>> {
    let mut out = vec![stability(&FixedPoint::unannotated(MeanFieldState::trivial(b), 0.0), p, b)?];
    for u in nontrivial_roots(p, b, grid)? {
        for sgn in [1.0, -1.0] {
            let fp = FixedPoint::unannotated(lift(u, sgn, p, b), u);
            out.push(stability(&fp, p, b)?);
        }
    }
    Ok(out)
}

/// Jacobian of the `(x̄, p̄, s_x, s_y)` system with `s_z = ±√(1−s_x²−s_y²)`
/// eliminated.
pub fn reduced_jacobian(s: &MeanFieldState, p: &ModelParams, _b: Branch) -> Result<Mat<f64>> {
    if s.sz.abs() < 1e-8 {
        return Err(Error::SingularElimination(s.sz));
    }
    let w0 = p.omega0;
    let big = p.eta * p.omega0;
    let sq2 = std::f64::consts::SQRT_2;
    let (x, pb, sx, sy, sz) = (s.xbar, s.pbar, s.sx, s.sy, s.sz);
    let (g1, g2, g) = (p.gamma1, p.gamma2, p.g);
    let mut j = Mat::<f64>::zeros(4, 4);
    j[(0, 0)] = w0 * (-g1 - g2 * (3.0 * x * x + pb * pb));
    j[(0, 1)] = w0 * ((1.0 - p.mu) - 2.0 * g2 * x * pb);
    j[(1, 0)] = w0 * (-(1.0 + p.mu) - 2.0 * g2 * x * pb);
    j[(1, 1)] = w0 * (-g1 - g2 * (x * x + 3.0 * pb * pb));
    j[(1, 2)] = -w0 * g / sq2;
    j[(2, 3)] = -big;
    j[(3, 0)] = -big * sq2 * g * sz;
    j[(3, 2)] = big * (1.0 + sq2 * g * x * sx / sz);
    j[(3, 3)] = big * sq2 * g * x * sy / sz;
    Ok(j)
}

/// Threshold on eigenvalue real parts below which a point counts as stable.
pub const STABILITY_TOL: f64 = 1e-9;

/// Jacobian of `(x̄, p̄)` with the spin following adiabatically,
/// `s_x = √2 g x̄ s_z`, `s_z = ±(2g²x̄²+1)^{-1/2}`.
pub fn slow_jacobian(s: &MeanFieldState, p: &ModelParams, b: Branch) -> Mat<f64> {
    let w0 = p.omega0;
    let (x, pb, g1, g2, g) = (s.xbar, s.pbar, p.gamma1, p.gamma2, p.g);
    let dsx = b.sign() * g * g * (2.0 * g * g * x * x + 1.0).powf(-1.5);
    let mut j = Mat::<f64>::zeros(2, 2);
    j[(0, 0)] = w0 * (-g1 - g2 * (3.0 * x * x + pb * pb));
    j[(0, 1)] = w0 * ((1.0 - p.mu) - 2.0 * g2 * x * pb);
    j[(1, 0)] = w0 * (-(1.0 + p.mu) - 2.0 * g2 * x * pb - dsx);
    j[(1, 1)] = w0 * (-g1 - g2 * (x * x + 3.0 * pb * pb));
    j
}

/// Annotates a fixed point with both Jacobian spectra. Stability is read
/// from the slow (adiabatic) spectrum: the fast spin pair sits at `±iΩ`
/// with a real part that vanishes as `η → ∞`.
pub fn stability(fp: &FixedPoint, p: &ModelParams, b: Branch) -> Result<FixedPoint> {
    let j = reduced_jacobian(&fp.state, p, b)?;
    let ev: Vec<c64> = j.eigenvalues().map_err(|_| Error::Eigen)?;
    let det = ev.iter().fold(c64::new(1.0, 0.0), |acc, z| acc * z).re;
    let slow: Vec<c64> = slow_jacobian(&fp.state, p, b).eigenvalues().map_err(|_| Error::Eigen)?;
    let mut out = fp.clone();
    out.stable = slow.iter().all(|z| z.re < -STABILITY_TOL);
    out.jacobian_eigenvalues = ev.iter().map(|z| (z.re, z.im)).collect();
    out.jacobian_det = det;
    out.slow_eigenvalues = slow.iter().map(|z| (z.re, z.im)).collect();
    Ok(out)
}

/// Coefficients `c_{2n}` of `F_b(x) = Σ c_{2n} x^{2n}`; `c[n]` multiplies `x^{2n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandauCoeffs {
    pub branch: Branch,
    pub order: usize,
    pub c: Vec<f64>,
}

impl LandauCoeffs {
    /// Coefficient of `x^power` (even powers only; odd powers are zero).
    pub fn get(&self, power: usize) -> f64 {
        if power % 2 == 1 {
            return 0.0;
        }
        self.c.get(power / 2).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x * x;
        self.c.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Expands `(2g²u+1)^{-1/2}` to order `order` and integrates the resulting
/// polynomial `h(u)/u` term by term. `c₀` is fixed to zero.
///
/// At μ = 1 only `c₂` is finite.
pub fn landau_coeffs(p: &ModelParams, b: Branch, order: usize) -> LandauCoeffs {
    let order = order.max(1);
    let s = b.sign();
    let g2 = p.g * p.g;
    // binomial series of (1 + 2g²u)^{-1/2}
    let mut series = vec![1.0];
    for n in 1..=order {
        let prev = series[n - 1];
        series.push(prev * (-0.5 - (n as f64 - 1.0)) / n as f64 * 2.0 * g2);
    }
    let a: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(n, &gn)| if n == 0 { -(1.0 + p.mu) - s * g2 * gn } else { -s * g2 * gn })
        .collect();
    let one_m = 1.0 - p.mu;
    let mut d = vec![0.0; order + 2];
    d[0] = p.gamma1;
    for (n, &an) in a.iter().enumerate() {
        let q = if n == 0 { 1.0 + an / one_m } else { an / one_m };
        d[n + 1] = p.gamma2 * q;
    }
    let mut h = poly_mul(&d, &d);
    for (n, &an) in a.iter().enumerate() {
        h[n] -= one_m * an;
    }
    let mut c = vec![0.0];
    c.extend(h.iter().enumerate().map(|(k, &hk)| hk / (k as f64 + 1.0)));
    // c₂ = h(0)/0-limit is finite even at μ = 1
    c[1] = c2_closed(p, b);
    LandauCoeffs { branch: b, order, c }
}

/// `c₂± = (1−μ)(1+μ±g²) + γ₁²`.
pub fn c2_closed(p: &ModelParams, b: Branch) -> f64 {
    (1.0 - p.mu) * (1.0 + p.mu + b.sign() * p.g * p.g) + p.gamma1 * p.gamma1
}

/// `c₄± = ±(μ−1)g⁴/2 + γ₂γ₁(2μ±g²)/(μ−1)`.
pub fn c4_closed(p: &ModelParams, b: Branch) -> f64 {
    let s = b.sign();
    let g2 = p.g * p.g;
    s * (p.mu - 1.0) * g2 * g2 / 2.0 + p.gamma2 * p.gamma1 * (2.0 * p.mu + s * g2) / (p.mu - 1.0)
}

/// `c₆⁻` from the second-order expansion of the spin factor.
pub fn c6_minus_closed(p: &ModelParams) -> f64 {
    let g2 = p.g * p.g;
    let m1 = p.mu - 1.0;
    (2.0 * (g2 - 2.0 * p.mu).powi(2) * p.gamma2 * p.gamma2
        + 4.0 * g2 * g2 * p.gamma2 * p.gamma1 * m1
        + 3.0 * g2 * g2 * g2 * m1.powi(3))
        / (6.0 * m1 * m1)
}

/// `g_c = √(|1+γ₁²−μ²| / |μ−1|)`.
pub fn critical_coupling_gc(p: &ModelParams) -> Result<f64> {
    if p.mu == 1.0 {
        return Err(Error::DivergentCritical);
    }
    Ok(((1.0 + p.gamma1 * p.gamma1 - p.mu * p.mu).abs() / (p.mu - 1.0).abs()).sqrt())
}

/// Mean-field tricritical two-photon rate `(μ−1)²g_c⁴ / (2γ₁(2μ−g_c²))`.
pub fn tricritical_gamma2(p: &ModelParams) -> Result<f64> {
    let mu_c = p.critical_mu();
    if p.mu <= mu_c {
        return Err(Error::OutsideInvertedRegime { mu: p.mu, mu_c });
    }
    let gc2 = critical_coupling_gc(p)?.powi(2);
    let den = 2.0 * p.mu - gc2;
    if den.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator(den));
    }
    Ok((p.mu - 1.0).powi(2) * gc2 * gc2 / (2.0 * p.gamma1 * den))
}

/// Closed-form nontrivial solution of the linear-decay (`γ₂ = 0`) equations
/// on the (−) branch, defined for `g > g_c`.
pub fn linear_decay_solution(p: &ModelParams) -> Result<MeanFieldState> {
    let gc = critical_coupling_gc(p)?;
    if p.g <= gc {
        return Err(Error::RegimeViolation(format!("need g > g_c = {gc}")));
    }
    let sz = (1.0 + p.gamma1 * p.gamma1 - p.mu * p.mu) / (p.g * p.g * (p.mu - 1.0));
    let x = -(1.0 / (std::f64::consts::SQRT_2 * p.g)) * (1.0 / (sz * sz) - 1.0).sqrt();
    let s_plus = p.g * x * sz / std::f64::consts::SQRT_2;
    Ok(MeanFieldState {
        xbar: x,
        pbar: p.gamma1 / (1.0 - p.mu) * x,
        sx: 2.0 * s_plus,
        sy: 0.0,
        sz,
    })
}

/// Evaluation mode for `F_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FOrder {
    Truncated(usize),
    Exact,
}

/// `F_b(x) = ∫₀^{x²} h(u)/u du` with `F_b(0) = 0`.
pub fn f_potential(x: f64, p: &ModelParams, b: Branch, order: FOrder) -> f64 {
    match order {
        FOrder::Truncated(n) => landau_coeffs(p, b, n).eval(x),
        FOrder::Exact => f_exact_u(x * x, p, b),
    }
}

fn f_exact_u(u: f64, p: &ModelParams, b: Branch) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    // split geometrically so the small-u curvature is resolved
    let mut breaks = vec![0.0];
    let mut t = u;
    let lo = (1e-6 * u).max(1e-12);
    let mut inner = Vec::new();
    while t > lo {
        inner.push(t);
        t *= 0.1;
    }
    inner.reverse();
    breaks.extend(inner);
    quad::integrate_pieces(&|v| h_reduced(v, p, b), &breaks, 1e-14, 1e-13).value
}

/// Phase of one spin branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "NP")]
    Normal,
    #[serde(rename = "SRP")]
    Superradiant,
    /// No stable fixed point exists (linear decay only, inverted regime).
    #[serde(rename = "UNSTABLE")]
    Unstable,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Normal => "NP",
            Phase::Superradiant => "SRP",
            Phase::Unstable => "UNSTABLE",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseResult {
    pub phase: Phase,
    pub n_mf: f64,
    pub sz: f64,
    pub selected: FixedPoint,
}

/// Global-minimum classification of the steady state of branch `b`.
pub fn classify_phase(p: &ModelParams, b: Branch, grid: &RootGrid) -> Result<PhaseResult> {
    let fps = fixed_points(p, b, grid)?;
    let trivial = fps[0].clone();
    let best = fps
        .iter()
        .skip(1)
        .filter(|f| f.stable)
        .map(|f| (f_exact_u(f.u, p, b), f))
        .min_by(|a, c| a.0.total_cmp(&c.0));
    let (phase, selected) = match best {
        Some((f_val, fp)) if !trivial.stable || f_val < 0.0 => (Phase::Superradiant, fp.clone()),
        _ if trivial.stable => (Phase::Normal, trivial),
        _ => (Phase::Unstable, trivial),
    };
    Ok(PhaseResult { phase, n_mf: selected.n_mf, sz: selected.state.sz, selected })
}

/// Local minima of `F_b` away from the origin, as `(u, F)`.
fn nontrivial_minima(p: &ModelParams, b: Branch, grid: &RootGrid) -> Result<Vec<(f64, f64)>> {
    Ok(nontrivial_roots(p, b, grid)?
        .into_iter()
        .filter(|&u| {
            let du = 1e-6 * u;
            h_reduced(u + du, p, b) - h_reduced(u - du, p, b) > 0.0
        })
        .map(|u| (u, f_exact_u(u, p, b)))
        .collect())
}

/// `true` on the superradiant side of the global-minimum criterion.
fn superradiant_side(p: &ModelParams, b: Branch, grid: &RootGrid) -> Result<bool> {
    if c2_closed(p, b) < 0.0 {
        return Ok(true);
    }
    let mins = nontrivial_minima(p, b, grid)?;
    Ok(mins.iter().any(|&(_, f)| f < 0.0))
}

/// Location `g*` where the global minimum of the exact `F_b` switches
/// between the trivial and a nontrivial solution. Fails with
/// `NoCoexistence` when the switch coincides with `c₂ = 0` (continuous
/// transition) or no switch lies inside the window.
pub fn first_order_boundary(p: &ModelParams, b: Branch, g_window: (f64, f64)) -> Result<f64> {
    let grid = RootGrid::default();
    let (lo, hi) = g_window;
    let side = |g: f64| superradiant_side(&p.with_g(g), b, &grid);
    let (s_lo, s_hi) = (side(lo)?, side(hi)?);
    if s_lo == s_hi {
        return Err(Error::NoCoexistence { lo, hi });
    }
    let (mut a, mut c) = (lo, hi);
    while c - a > 1e-8 {
        let m = 0.5 * (a + c);
        if side(m)? == s_lo {
            a = m;
        } else {
            c = m;
        }
    }
    let g_star = 0.5 * (a + c);
    // a continuous switch sits on c₂ = 0 with a vanishing nontrivial minimum
    let srp_edge = if s_lo { a } else { c };
    let u_jump = nontrivial_minima(&p.with_g(srp_edge), b, &grid)?
        .iter()
        .map(|m| m.0)
        .fold(0.0f64, f64::max);
    if c2_closed(&p.with_g(g_star), b).abs() < 1e-6 && u_jump < 1e-4 {
        return Err(Error::NoCoexistence { lo, hi });
    }
    Ok(g_star)
}

/// Kind of transition adjacent to a phase-diagram node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionOrder {
    First,
    Second,
    Tricritical,
}

impl TransitionOrder {
    pub fn label(self) -> &'static str {
        match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
            TransitionOrder::Tricritical => "tricritical",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhasePoint {
    pub mu: f64,
    pub g: f64,
    pub phase_minus: Option<Phase>,
    pub phase_plus: Option<Phase>,
    pub n_mf_minus: f64,
    pub n_mf_plus: f64,
    pub transition_order_nearby: Option<TransitionOrder>,
    /// `None` on success, otherwise the solver error for this node.
    pub failure: Option<String>,
}

fn half_spacing(list: &[f64], i: usize) -> f64 {
    let left = if i > 0 { list[i] - list[i - 1] } else { f64::INFINITY };
    let right = if i + 1 < list.len() { list[i + 1] - list[i] } else { f64::INFINITY };
    let h = left.abs().min(right.abs());
    if h.is_finite() {
        0.5 * h
    } else {
        1e-9
    }
}

fn near_tricritical(p: &ModelParams, dmu: f64, dg: f64) -> bool {
    let Ok(gc) = critical_coupling_gc(p) else { return false };
    if (p.g - gc).abs() > dg.max(1e-9) {
        return false;
    }
    let at = |mu: f64| tricritical_gamma2(&p.with_mu(mu)).map(|g2c| g2c - p.gamma2);
    match (at(p.mu - dmu), at(p.mu + dmu), at(p.mu)) {
        (_, _, Ok(v)) if v.abs() < 1e-9 => true,
        (Ok(a), Ok(c), _) => a * c <= 0.0,
        _ => false,
    }
}

fn order_at_boundary(p: &ModelParams, b: Branch) -> TransitionOrder {
    match critical_coupling_gc(p) {
        Ok(gc) if c4_closed(&p.with_g(gc), b) > 0.0 => TransitionOrder::Second,
        _ => TransitionOrder::First,
    }
}

/// Classifies both branches on every `(μ, g)` node. Per-node failures are
/// recorded and never abort the sweep.
pub fn phase_diagram(mu_list: &[f64], g_list: &[f64], base: &ModelParams) -> Vec<PhasePoint> {
    let grid = RootGrid::default();
    let nodes: Vec<(usize, usize)> = (0..mu_list.len())
        .flat_map(|i| (0..g_list.len()).map(move |j| (i, j)))
        .collect();
    let classified: Vec<[Result<PhaseResult>; 2]> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let p = base.with_mu(mu_list[i]).with_g(g_list[j]);
            [classify_phase(&p, Branch::Minus, &grid), classify_phase(&p, Branch::Plus, &grid)]
        })
        .collect();
    let phase_of = |i: usize, j: usize, k: usize| -> Option<Phase> {
        classified[i * g_list.len() + j][k].as_ref().ok().map(|r| r.phase)
    };
    nodes
        .iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let p = base.with_mu(mu_list[i]).with_g(g_list[j]);
            let [m, pl] = &classified[idx];
            let failure = match (m, pl) {
                (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
                _ => None,
            };
            let mut order = None;
            if near_tricritical(&p, half_spacing(mu_list, i), half_spacing(g_list, j)) {
                order = Some(TransitionOrder::Tricritical);
            } else {
                for (k, b) in [(0usize, Branch::Minus), (1, Branch::Plus)] {
                    let here = phase_of(i, j, k);
                    let neighbours = [j.checked_sub(1), (j + 1 < g_list.len()).then_some(j + 1)];
                    let changes = neighbours
                        .iter()
                        .flatten()
                        .any(|&jj| here.is_some() && phase_of(i, jj, k).is_some() && phase_of(i, jj, k) != here);
                    if changes {
                        order = Some(order_at_boundary(&p, b));
                        break;
                    }
                }
            }
            PhasePoint {
                mu: mu_list[i],
                g: g_list[j],
                phase_minus: m.as_ref().ok().map(|r| r.phase),
                phase_plus: pl.as_ref().ok().map(|r| r.phase),
                n_mf_minus: m.as_ref().map(|r| r.n_mf).unwrap_or(f64::NAN),
                n_mf_plus: pl.as_ref().map(|r| r.n_mf).unwrap_or(f64::NAN),
                transition_order_nearby: order,
                failure,
            }
        })
        .collect()
}

/// One row of the tetracritical search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TetracriticalRow {
    pub mu: f64,
    /// Both roots `g² = 6μ+1 ± √(24μ²+1)`.
    pub g2_roots: [f64; 2],
    /// Required `γ₁² = (μ−1)(1+μ−g²)` at each root.
    pub gamma1_sq: [f64; 2],
    /// `γ₁²·6(μ−1)²·c₆⁻` with `c₂⁻ = c₄⁻ = 0` imposed; zero on an exact root.
    pub c6_residual: [f64; 2],
    pub exists: bool,
}

/// Solves `c₂⁻ = c₄⁻ = c₆⁻ = 0` for each μ and reports whether a real γ₁ exists.
pub fn tetracritical_scan(mu_list: &[f64]) -> Vec<TetracriticalRow> {
    mu_list
        .iter()
        .map(|&mu| {
            let disc = (24.0 * mu * mu + 1.0).sqrt();
            let roots = [6.0 * mu + 1.0 + disc, 6.0 * mu + 1.0 - disc];
            let m1 = mu - 1.0;
            let gamma1_sq = roots.map(|y| m1 * (1.0 + mu - y));
            let c6_residual = [0, 1].map(|k| {
                let y = roots[k];
                let g1sq = gamma1_sq[k];
                let g1g2 = m1 * m1 * y * y / (2.0 * (2.0 * mu - y));
                2.0 * (y - 2.0 * mu).powi(2) * g1g2 * g1g2 + 4.0 * y * y * m1 * g1sq * g1g2
                    + 3.0 * y.powi(3) * m1.powi(3) * g1sq
            });
            let exists = gamma1_sq.iter().any(|&v| v >= 0.0);
            TetracriticalRow { mu, g2_roots: roots, gamma1_sq, c6_residual, exists }
        })
        .collect()
}

//! Vectorized Lindblad generators and trace-constrained steady states.
//!
//! Vectorization stacks columns: `ρ_ij ↦ i + d·j`, so that
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. Dissipators use the trace-preserving
//! sign, `r (cρc† − ½{c†c, ρ})`.

use std::io::Write;
use std::path::Path;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, I, ZERO};
use crate::ops::{self, CutoffConfig, CutoffTarget, FockOperator};
use crate::params::{Branch, ModelParams};

/// Relative magnitude below which operator entries are not stored.
pub const ENTRY_FLOOR: f64 = 1e-16;

#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub dim: usize,
    pub matrix: SparseColMat<usize, c64>,
    pub rates: Vec<f64>,
    /// `true` when the Hilbert space is spin⊗boson.
    pub spin: bool,
    pub cutoff: usize,
}

fn nonzeros(m: &CMat, floor: f64) -> Vec<(usize, usize, c64)> {
    let cut = floor * linalg::max_abs(m);
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v.norm() > cut {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Assembles `L = −i(I⊗H − Hᵀ⊗I) + Σ r_k [c̄_k⊗c_k − ½ I⊗c_k†c_k − ½ (c_k†c_k)ᵀ⊗I]`.
pub fn build_liouvillian(h: &FockOperator, jumps: &[(FockOperator, f64)]) -> Result<Liouvillian> {
    let d = h.dim();
    if h.matrix.ncols() != d {
        return Err(Error::ShapeMismatch(format!("Hamiltonian is {}x{}", d, h.matrix.ncols())));
    }
    for (c, _) in jumps {
        if c.matrix.nrows() != d || c.matrix.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "jump is {}x{}, Hamiltonian is {d}x{d}",
                c.matrix.nrows(),
                c.matrix.ncols()
            )));
        }
    }
    // H_eff = H − (i/2) Σ r c†c carries the anticommutator terms
    let mut heff = h.matrix.clone();
    for (c, r) in jumps {
        let cdc = &linalg::dagger(&c.matrix) * &c.matrix;
        heff = linalg::sub(&heff, &linalg::scale(&cdc, I * (0.5 * r)));
    }
    let heff_nz = nonzeros(&heff, ENTRY_FLOOR);
    let mut trips: Vec<Triplet<usize, usize, c64>> = Vec::with_capacity(2 * d * heff_nz.len());
    for &(i, k, v) in &heff_nz {
        let left = -I * v;
        let right = I * v.conj();
        for j in 0..d {
            // −i H_eff ρ : (i + dj, k + dj)
            trips.push(Triplet::new(i + d * j, k + d * j, left));
            // +i ρ H_eff† : (j + d i, j + d k), since H_eff†[k,i] = conj(H_eff[i,k])
            trips.push(Triplet::new(j + d * i, j + d * k, right));
        }
    }
    for (c, r) in jumps {
        let nz = nonzeros(&c.matrix, ENTRY_FLOOR);
        for &(i, k, v) in &nz {
            for &(j, l, w) in &nz {
                trips.push(Triplet::new(i + d * j, k + d * l, cr(*r) * v * w.conj()));
            }
        }
    }
    let n = d * d;
    let matrix = SparseColMat::try_new_from_triplets(n, n, &trips)
        .map_err(|e| Error::ShapeMismatch(format!("sparse assembly failed: {e:?}")))?;
    Ok(Liouvillian {
        dim: d,
        matrix,
        rates: jumps.iter().map(|j| j.1).collect(),
        spin: h.spin,
        cutoff: h.cutoff,
    })
}

impl Liouvillian {
    pub fn nnz(&self) -> usize {
        self.matrix.compute_nnz()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.val().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &Mat<c64>) -> Mat<c64> {
        &self.matrix * v
    }

    /// `max_col |vec(I)† L|`.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let m = self.matrix.as_ref();
        let mut worst = 0.0f64;
        for col in 0..m.ncols() {
            let mut s = ZERO;
            for (row, v) in m.row_idx_of_col(col).zip(m.val_of_col(col)) {
                if row % (d + 1) == 0 {
                    s += *v;
                }
            }
            worst = worst.max(s.norm());
        }
        worst
    }

    pub fn to_dense(&self) -> CMat {
        self.matrix.to_dense()
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: CMat,
    pub spin: bool,
    pub cutoff: usize,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::hermitian_eigenvalues(&self.matrix)?[0])
    }

    /// Partial trace over the spin.
    pub fn reduced_boson(&self) -> DensityMatrix {
        if !self.spin {
            return self.clone();
        }
        let n = self.cutoff;
        let m = Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] + self.matrix[(n + i, n + j)]);
        DensityMatrix { matrix: m, spin: false, cutoff: n }
    }

    /// Boson block `⟨s|ρ|t⟩` of a spin⊗boson state.
    pub fn spin_block(&self, s: usize, t: usize) -> CMat {
        let n = self.cutoff;
        Mat::from_fn(n, n, |i, j| self.matrix[(s * n + i, t * n + j)])
    }

    /// Population of each Fock level, summed over spin.
    pub fn fock_populations(&self) -> Vec<f64> {
        let r = self.reduced_boson();
        (0..r.cutoff).map(|k| r.matrix[(k, k)].re).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub n: f64,
    pub sz: Option<f64>,
    pub x2: f64,
    pub p2: f64,
    pub dx2: f64,
    pub dp2: f64,
    /// `(Re⟨a⟩, Im⟨a⟩)`.
    pub a_mean: (f64, f64),
}

impl Observables {
    pub fn a_abs(&self) -> f64 {
        self.a_mean.0.hypot(self.a_mean.1)
    }
}

pub fn observables(rho: &DensityMatrix) -> Observables {
    let b = rho.reduced_boson();
    let n_c = b.cutoff;
    let a = ops::annihilation(n_c).matrix;
    let x = ops::position(n_c).matrix;
    let p = ops::momentum(n_c).matrix;
    let ex = |op: &CMat| linalg::expect(op, &b.matrix);
    let a_mean = ex(&a);
    let xm = ex(&x).re;
    let pm = ex(&p).re;
    let x2 = ex(&(&x * &x)).re;
    let p2 = ex(&(&p * &p)).re;
    let n = (0..n_c).map(|k| k as f64 * b.matrix[(k, k)].re).sum();
    let sz = rho.spin.then(|| {
        let up: f64 = (0..n_c).map(|k| rho.matrix[(k, k)].re).sum();
        let down: f64 = (0..n_c).map(|k| rho.matrix[(n_c + k, n_c + k)].re).sum();
        up - down
    });
    Observables { n, sz, x2, p2, dx2: x2 - xm * xm, dp2: p2 - pm * pm, a_mean: (a_mean.re, a_mean.im) }
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    pub observables: Observables,
    /// `‖L vec(ρ)‖∞` against the exact generator.
    pub residual: f64,
    pub n_c: usize,
}

/// Knobs of the trace-constrained solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative magnitude below which generator entries are left out of the
    /// factorized preconditioner; `0` factorizes the exact system.
    pub drop_tol: f64,
    pub max_refine: usize,
    pub max_residual: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { drop_tol: 1e-11, max_refine: 40, max_residual: 1e-6 }
    }
}

fn constrained_system(l: &Liouvillian, drop_tol: f64) -> Result<SparseColMat<usize, c64>> {
    let d = l.dim;
    let n = d * d;
    let cut = drop_tol * l.max_abs();
    let m = l.matrix.as_ref();
    let mut trips = Vec::with_capacity(l.nnz() + d);
    for col in 0..n {
        for (row, v) in m.row_idx_of_col(col).zip(m.val_of_col(col)) {
            if row != 0 && v.norm() >= cut {
                trips.push(Triplet::new(row, col, *v));
            }
        }
    }
    for k in 0..d {
        trips.push(Triplet::new(0, k + d * k, cr(1.0)));
    }
    SparseColMat::try_new_from_triplets(n, n, &trips).map_err(|_| Error::SingularSystem)
}

fn inf_norm(v: &Mat<c64>) -> f64 {
    (0..v.nrows()).map(|i| v[(i, 0)].norm()).fold(0.0, f64::max)
}

fn all_finite(v: &Mat<c64>) -> bool {
    (0..v.nrows()).all(|i| v[(i, 0)].re.is_finite() && v[(i, 0)].im.is_finite())
}

/// Solves `A x = e₀` with a factorization of the (possibly thinned) system
/// followed by iterative refinement against the exact one.
fn refined_solve(l: &Liouvillian, opts: &SolveOptions) -> Result<Mat<c64>> {
    let n = l.dim * l.dim;
    let exact = constrained_system(l, 0.0)?;
    let thinned = opts.drop_tol > 0.0;
    let pre = if thinned { constrained_system(l, opts.drop_tol)? } else { exact.clone() };
    let lu = pre.sp_lu().map_err(|_| Error::SingularSystem)?;
    let mut rhs = Mat::<c64>::zeros(n, 1);
    rhs[(0, 0)] = cr(1.0);
    let mut x = lu.solve(&rhs);
    if !all_finite(&x) {
        return Err(Error::SingularSystem);
    }
    let scale = l.max_abs().max(1.0);
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_refine {
        let ax = &exact * &x;
        let r = Mat::from_fn(n, 1, |i, _| rhs[(i, 0)] - ax[(i, 0)]);
        let rn = inf_norm(&r);
        if rn < 1e-15 * scale * inf_norm(&x).max(1e-300) || rn >= last {
            break;
        }
        last = rn;
        let dx = lu.solve(&r);
        if !all_finite(&dx) {
            return Err(Error::SingularSystem);
        }
        x = Mat::from_fn(n, 1, |i, _| x[(i, 0)] + dx[(i, 0)]);
    }
    Ok(x)
}

/// Trace-constrained steady state: row 0 of `L` is replaced by `vec(I)†`
/// and the right-hand side by `e₀`.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    steady_state_with(l, &SolveOptions::default())
}

pub fn steady_state_with(l: &Liouvillian, opts: &SolveOptions) -> Result<SteadyStateResult> {
    let mut res = solve_and_check(l, opts);
    if opts.drop_tol > 0.0 && matches!(res, Err(Error::ResidualTooLarge(_)) | Err(Error::SingularSystem)) {
        res = solve_and_check(l, &SolveOptions { drop_tol: 0.0, ..*opts });
    }
    res
}

fn solve_and_check(l: &Liouvillian, opts: &SolveOptions) -> Result<SteadyStateResult> {
    let d = l.dim;
    let x = refined_solve(l, opts)?;
    let raw = Mat::from_fn(d, d, |i, j| x[(i + d * j, 0)]);
    let mut rho = linalg::hermitize(&raw);
    let tr = linalg::trace(&rho).re;
    if !(tr.abs() > 0.0) || !tr.is_finite() {
        return Err(Error::SingularSystem);
    }
    rho = linalg::scale(&rho, cr(1.0 / tr));
    let v = Mat::from_fn(d * d, 1, |k, _| rho[(k % d, k / d)]);
    let residual = inf_norm(&l.apply(&v));
    if residual > opts.max_residual {
        return Err(Error::ResidualTooLarge(residual));
    }
    let rho = DensityMatrix { matrix: rho, spin: l.spin, cutoff: l.cutoff };
    Ok(SteadyStateResult { observables: observables(&rho), rho, residual, n_c: l.cutoff })
}

/// Steady state from the dense eigen-decomposition of `L`: the eigenvector
/// whose eigenvalue is closest to zero, normalized to unit trace.
pub fn dense_null_space(l: &Liouvillian) -> Result<CMat> {
    let d = l.dim;
    let evd = l.to_dense().eigen().map_err(|_| Error::Eigen)?;
    let s = evd.S();
    let k = (0..d * d)
        .min_by(|&a, &b| s[a].norm().partial_cmp(&s[b].norm()).unwrap())
        .ok_or(Error::Eigen)?;
    let u = evd.U();
    let raw = Mat::from_fn(d, d, |i, j| u[(i + d * j, k)]);
    let tr = linalg::trace(&raw);
    Ok(linalg::hermitize(&Mat::from_fn(d, d, |i, j| raw[(i, j)] / tr)))
}

/// Eigenvalue of `L` with the largest real part, from a dense solve.
pub fn leading_eigenvalue(l: &Liouvillian) -> Result<c64> {
    let ev = l.to_dense().eigenvalues().map_err(|_| Error::Eigen)?;
    ev.into_iter().max_by(|a, b| a.re.partial_cmp(&b.re).unwrap()).ok_or(Error::Eigen)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    Fixed(usize),
    Auto(CutoffConfig),
}

fn boson_jumps(p: &ModelParams, n_c: usize, spin: bool) -> Vec<(FockOperator, f64)> {
    let r = p.raw_rates();
    let a = ops::annihilation(n_c);
    let a2 = FockOperator { matrix: &a.matrix * &a.matrix, ..a.clone() };
    let lift = |op: FockOperator| {
        if spin {
            FockOperator {
                matrix: linalg::kron(&linalg::identity(2), &op.matrix),
                spin: true,
                ..op
            }
        } else {
            op
        }
    };
    let mut jumps = Vec::new();
    if r.kappa1 > 0.0 {
        jumps.push((lift(a), 2.0 * r.kappa1));
    }
    if r.kappa2 > 0.0 {
        jumps.push((lift(a2), 2.0 * r.kappa2));
    }
    jumps
}

pub fn branch_liouvillian(p: &ModelParams, b: Branch, n_c: usize) -> Result<Liouvillian> {
    let h = ops::hamiltonian_branch(p, b, n_c)?;
    build_liouvillian(&h, &boson_jumps(p, n_c, false))
}

pub fn full_liouvillian(p: &ModelParams, n_c: usize) -> Result<Liouvillian> {
    let h = ops::hamiltonian_full(p, n_c);
    build_liouvillian(&h, &boson_jumps(p, n_c, true))
}

fn resolve_cutoff(p: &ModelParams, target: CutoffTarget, cutoff: Cutoff) -> Result<usize> {
    match cutoff {
        Cutoff::Fixed(n) => Ok(n),
        Cutoff::Auto(cfg) => ops::cutoff_select(p, target, &cfg),
    }
}

/// Steady state of one decoupled branch with jumps `a` (rate `2κ₁`) and
/// `a²` (rate `2κ₂`).
pub fn steady_state_branch(p: &ModelParams, b: Branch, cutoff: Cutoff) -> Result<SteadyStateResult> {
    let n_c = resolve_cutoff(p, CutoffTarget::Branch(b), cutoff)?;
    steady_state(&branch_liouvillian(p, b, n_c)?)
}

/// Steady state of the complete spin⊗boson model.
pub fn steady_state_full(p: &ModelParams, cutoff: Cutoff) -> Result<SteadyStateResult> {
    let n_c = resolve_cutoff(p, CutoffTarget::Full, cutoff)?;
    steady_state(&full_liouvillian(p, n_c)?)
}

/// Population of `|n_c − 1⟩` in the steady state at cutoff `n_c`.
pub fn top_level_population(p: &ModelParams, target: CutoffTarget, n_c: usize) -> Result<f64> {
    let ss = match target {
        CutoffTarget::Branch(b) => steady_state_branch(p, b, Cutoff::Fixed(n_c))?,
        CutoffTarget::Full => steady_state_full(p, Cutoff::Fixed(n_c))?,
    };
    Ok(ss.rho.fock_populations()[n_c - 1].abs())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub params: ModelParams,
    /// `"full"` or the branch label.
    pub model: String,
    pub n_c: usize,
    pub residual: f64,
    pub observables: Observables,
}

impl SteadyStateResult {
    pub fn report(&self, params: &ModelParams, model: &str) -> SteadyStateReport {
        SteadyStateReport {
            params: *params,
            model: model.to_string(),
            n_c: self.n_c,
            residual: self.residual,
            observables: self.observables,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `w[i][j] = W(x_i, p_j)`.
    pub w: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn max_abs(&self) -> f64 {
        self.w.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest `|W|` on the outer rows and columns.
    pub fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.x.len(), self.p.len());
        let mut m = 0.0f64;
        for i in 0..nx {
            for j in 0..np {
                if i == 0 || j == 0 || i + 1 == nx || j + 1 == np {
                    m = m.max(self.w[i][j].abs());
                }
            }
        }
        m
    }

    /// Trapezoidal `∫∫ W dx dp`.
    pub fn integral(&self) -> f64 {
        let wts = |v: &[f64], k: usize| -> f64 {
            let n = v.len();
            if n < 2 {
                return 0.0;
            }
            let left = if k > 0 { v[k] - v[k - 1] } else { 0.0 };
            let right = if k + 1 < n { v[k + 1] - v[k] } else { 0.0 };
            0.5 * (left + right)
        };
        let mut s = 0.0;
        for i in 0..self.x.len() {
            for j in 0..self.p.len() {
                s += wts(&self.x, i) * wts(&self.p, j) * self.w[i][j];
            }
        }
        s
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "p", "W"]).map_err(|e| Error::Io(e.to_string()))?;
        for (i, x) in self.x.iter().enumerate() {
            for (j, p) in self.p.iter().enumerate() {
                w.serialize((x, p, self.w[i][j])).map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, |f| self.write_csv(f))
    }
}

/// `e^{−y/2} (2r)^k √(n!/(n+k)!) L_n^k(y)` for `n = 0..len`, with `y = 4r²`,
/// by the normalized upward recurrence carried in log-scaled form.
fn scaled_laguerre_column(k: usize, r: f64, len: usize) -> Vec<f64> {
    let y = 4.0 * r * r;
    let kf = k as f64;
    let log_pref = if k == 0 { -0.5 * y } else { kf * (2.0 * r).ln() - 0.5 * y }
        - 0.5 * statrs::function::gamma::ln_gamma(kf + 1.0);
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    // psi_n = √(n!/(n+k)!) L_n^k(y) · √(k!) ; carried as mantissa · e^{log_s}
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut log_s = log_pref;
    out[0] = if log_s > -745.0 { cur * log_s.exp() } else { 0.0 };
    for n in 0..len.saturating_sub(1) {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + kf - y) * cur - (nf * (nf + kf)).sqrt() * prev)
            / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
        prev = cur;
        cur = next;
        let a = cur.abs().max(prev.abs());
        if a > 1e100 || (a < 1e-100 && a > 0.0) {
            let sh = a.ln();
            cur /= a;
            prev /= a;
            log_s += sh;
        }
        let lv = log_s;
        out[n + 1] = if lv > -745.0 && lv < 709.0 { cur * lv.exp() } else if lv >= 709.0 { f64::INFINITY } else { 0.0 };
    }
    out
}

/// Wigner function of a boson density matrix, normalized so that
/// `∫∫ W dx dp = 1` with `x = (a + a†)/√2`.
pub fn wigner_numeric(rho: &DensityMatrix, x_list: &[f64], p_list: &[f64]) -> Result<WignerGrid> {
    if rho.spin {
        return Err(Error::ShapeMismatch("Wigner function needs a boson-only state".into()));
    }
    let d = rho.dim();
    let m = &rho.matrix;
    let w: Vec<Vec<f64>> = x_list
        .iter()
        .map(|&x| {
            p_list
                .iter()
                .map(|&p| {
                    let alpha = c64::new(x, p) / 2f64.sqrt();
                    let r = alpha.norm();
                    let phase = if r > 0.0 { alpha / r } else { cr(1.0) };
                    let mut s = 0.0;
                    for k in 0..d {
                        let col = scaled_laguerre_column(k, r, d - k);
                        let ph = phase.powu(k as u32);
                        for (n, lv) in col.iter().enumerate() {
                            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                            // ⟨n+k|D P D†|n⟩ = (−1)^n (2α)^k √(n!/(n+k)!) e^{−2|α|²} L_n^k
                            let elem = ph * (sign * lv);
                            let contrib = m[(n, n + k)] * elem;
                            s += if k == 0 { contrib.re } else { 2.0 * contrib.re };
                        }
                    }
                    s / std::f64::consts::PI
                })
                .collect()
        })
        .collect();
    let grid = WignerGrid { x: x_list.to_vec(), p: p_list.to_vec(), w };
    let peak = grid.max_abs();
    let edge = grid.boundary_max();
    if edge > 1e-6 * peak {
        return Err(Error::GridTooNarrow(edge / peak));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests;

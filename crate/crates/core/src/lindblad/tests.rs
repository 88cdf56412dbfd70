use super::*;
use crate::ops::{annihilation, hamiltonian_full};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn params(eta: f64, mu: f64, g: f64, g1: f64, g2: f64) -> ModelParams {
    ModelParams::normalized(eta, mu, g, g1, g2).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    Mat::from_fn(d, d, |_, _| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_model(seed: u64, d: usize) -> Liouvillian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = linalg::hermitize(&random_matrix(&mut rng, d));
    let h = FockOperator { cutoff: d, spin: false, hermitian: true, matrix: h };
    let jumps: Vec<(FockOperator, f64)> = (0..2)
        .map(|_| {
            let c = random_matrix(&mut rng, d);
            (FockOperator { cutoff: d, spin: false, hermitian: false, matrix: c }, rng.random_range(0.2..2.0))
        })
        .collect();
    build_liouvillian(&h, &jumps).unwrap()
}

fn boson_state(m: CMat) -> DensityMatrix {
    let n = m.nrows();
    DensityMatrix { matrix: m, spin: false, cutoff: n }
}

#[test]
fn pure_decay_relaxes_to_vacuum() {
    let h = FockOperator { cutoff: 2, spin: false, hermitian: true, matrix: Mat::zeros(2, 2) };
    let l = build_liouvillian(&h, &[(annihilation(2), 1.0)]).unwrap();
    let ss = steady_state(&l).unwrap();
    assert!((ss.rho.matrix[(0, 0)] - cr(1.0)).norm() < 1e-14);
    assert!(ss.rho.matrix[(1, 1)].norm() < 1e-14);
}

#[test]
fn shape_mismatch_rejected() {
    let h = FockOperator { cutoff: 3, spin: false, hermitian: true, matrix: Mat::zeros(3, 3) };
    assert!(matches!(build_liouvillian(&h, &[(annihilation(4), 1.0)]), Err(Error::ShapeMismatch(_))));
}

#[test]
fn random_generators_preserve_trace() {
    for seed in 0..10 {
        let l = random_model(seed, 2 + seed as usize);
        assert!(l.trace_defect() < 1e-10 * l.max_abs(), "seed {seed}");
    }
}

#[test]
fn leading_eigenvalue_is_zero() {
    let p = params(5.0, 0.4, 0.7, 1.0, 0.5);
    let l = branch_liouvillian(&p, Branch::Minus, 16).unwrap();
    let ev = leading_eigenvalue(&l).unwrap();
    assert!(ev.norm() < 1e-9, "{ev}");
}

#[test]
fn sparse_solve_matches_dense_null_space() {
    for seed in 0..6 {
        let d = 3 + 2 * seed as usize;
        let l = random_model(100 + seed, d);
        let ss = steady_state(&l).unwrap();
        let dense = dense_null_space(&l).unwrap();
        let diff = linalg::max_abs(&linalg::sub(&ss.rho.matrix, &dense));
        assert!(diff < 1e-8, "d={d}: {diff}");
        assert!(ss.rho.min_eigenvalue().unwrap() > -1e-8);
    }
}

#[test]
fn decoupled_spin_has_degenerate_steady_manifold() {
    let p = params(10.0, 0.0, 0.0, 1.0, 0.0);
    assert!(matches!(steady_state_full(&p, Cutoff::Fixed(6)), Err(Error::SingularSystem) | Err(Error::ResidualTooLarge(_))));
}

#[test]
fn weak_coupling_spin_follows_detailed_balance() {
    // oscillator-mediated spin flips with Lorentzian weights at Ω ∓ ω₀
    for eta in [4.0, 10.0, 30.0] {
        let p = params(eta, 0.0, 0.01, 1.0, 0.0);
        let ss = steady_state_full(&p, Cutoff::Fixed(8)).unwrap();
        let r = ((eta - 1.0f64).powi(2) + 1.0) / ((eta + 1.0f64).powi(2) + 1.0);
        let expect = (r - 1.0) / (r + 1.0);
        assert!(ss.observables.n < 1e-4);
        let sz = ss.observables.sz.unwrap();
        assert!((sz - expect).abs() < 0.02 * expect.abs(), "η={eta}: {sz} vs {expect}");
    }
}

#[test]
fn full_model_weak_parity_symmetry() {
    let p = params(20.0, 2.0, 1.7292, 0.1, 44.26);
    let ss = steady_state_full(&p, Cutoff::Fixed(30)).unwrap();
    assert!(ss.observables.a_abs() < 1e-7);
    assert!(ss.residual < 1e-8);
    assert!(ss.rho.hermiticity_defect() < 1e-9);
    assert!((ss.rho.trace() - 1.0).abs() < 1e-10);
    assert!(ss.rho.min_eigenvalue().unwrap() > -1e-8);
}

#[test]
fn branch_vacuum_without_coupling() {
    let p = params(40.0, 0.0, 0.0, 1.0, 0.3);
    for b in Branch::BOTH {
        let ss = steady_state_branch(&p, b, Cutoff::Fixed(12)).unwrap();
        assert!(ss.observables.n < 1e-12);
        assert!((ss.observables.x2 - 0.5).abs() < 1e-12);
    }
}

#[test]
fn thinned_factorization_agrees_with_exact() {
    let p = params(200.0, 2.0, 1.7292, 0.1, 44.26);
    let l = branch_liouvillian(&p, Branch::Minus, 50).unwrap();
    let a = steady_state_with(&l, &SolveOptions { drop_tol: 1e-8, ..Default::default() }).unwrap();
    let b = steady_state_with(&l, &SolveOptions { drop_tol: 0.0, ..Default::default() }).unwrap();
    assert!(linalg::max_abs(&linalg::sub(&a.rho.matrix, &b.rho.matrix)) < 1e-10);
}

#[test]
fn cutoff_doubling_is_stable_once_tail_is_small() {
    let p = params(50.0, 0.0, 1.2, 1.0, 0.1);
    let n = ops::cutoff_select(&p, CutoffTarget::Branch(Branch::Minus), &CutoffConfig::default()).unwrap();
    let a = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(n)).unwrap().observables.n;
    let b = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(2 * n)).unwrap().observables.n;
    assert!(((a - b) / b).abs() < 1e-6, "{a} {b}");
}

#[test]
fn report_serializes() {
    let p = params(40.0, 0.0, 0.5, 1.0, 0.3);
    let ss = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(12)).unwrap();
    let js = serde_json::to_string(&ss.report(&p, "minus")).unwrap();
    let back: SteadyStateReport = serde_json::from_str(&js).unwrap();
    assert_eq!(back.n_c, 12);
    assert_eq!(back.params, p);
}

fn axis(lim: f64, n: usize) -> Vec<f64> {
    crate::roots::linspace(-lim, lim, n)
}

#[test]
fn wigner_of_fock_states() {
    let mut v = Mat::<c64>::zeros(4, 4);
    v[(0, 0)] = cr(1.0);
    let w = wigner_numeric(&boson_state(v.clone()), &axis(6.0, 3), &axis(6.0, 3)).unwrap();
    assert!((w.w[1][1] - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    let mut f1 = Mat::<c64>::zeros(4, 4);
    f1[(1, 1)] = cr(1.0);
    let w = wigner_numeric(&boson_state(f1), &axis(7.0, 3), &axis(7.0, 3)).unwrap();
    assert!((w.w[1][1] + 1.0 / std::f64::consts::PI).abs() < 1e-14);
    assert!(matches!(wigner_numeric(&boson_state(v), &axis(1.0, 5), &axis(1.0, 5)), Err(Error::GridTooNarrow(_))));
}

#[test]
fn wigner_matches_gaussian_of_coherent_state() {
    let n_c = 40;
    let beta = c64::new(1.0, -0.5);
    let mut amp = vec![c64::new((-0.5 * beta.norm_sqr()).exp(), 0.0)];
    for k in 1..n_c {
        let prev = amp[k - 1];
        amp.push(prev * beta / (k as f64).sqrt());
    }
    let rho = Mat::from_fn(n_c, n_c, |i, j| amp[i] * amp[j].conj());
    let xs = axis(7.0, 71);
    let w = wigner_numeric(&boson_state(rho), &xs, &xs).unwrap();
    let (x0, p0) = (2f64.sqrt() * beta.re, 2f64.sqrt() * beta.im);
    for (i, x) in xs.iter().enumerate().step_by(7) {
        for (j, p) in xs.iter().enumerate().step_by(7) {
            let exact = (-(x - x0).powi(2) - (p - p0).powi(2)).exp() / std::f64::consts::PI;
            assert!((w.w[i][j] - exact).abs() < 1e-10);
        }
    }
    assert!((w.integral() - 1.0).abs() < 1e-6);
}

#[test]
fn wigner_of_steady_state_is_centrosymmetric() {
    let p = params(20.0, 0.0, 1.6, 1.0, 0.2);
    let ss = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(40)).unwrap();
    let xs = axis(8.0, 33);
    let w = wigner_numeric(&ss.rho, &xs, &xs).unwrap();
    let n = xs.len();
    for i in 0..n {
        for j in 0..n {
            assert!((w.w[i][j] - w.w[n - 1 - i][n - 1 - j]).abs() < 1e-8);
        }
    }
    assert!((w.integral() - 1.0).abs() < 1e-6);
}

#[test]
fn wigner_csv_layout() {
    let mut v = Mat::<c64>::zeros(3, 3);
    v[(0, 0)] = cr(1.0);
    let w = wigner_numeric(&boson_state(v), &axis(6.0, 3), &axis(6.0, 5)).unwrap();
    let mut buf = Vec::new();
    w.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 16);
    assert!(text.starts_with("x,p,W"));
}

#[test]
fn full_model_rejects_spin_state_for_wigner() {
    let ss = steady_state_full(&params(10.0, 0.0, 0.3, 1.0, 0.0), Cutoff::Fixed(6)).unwrap();
    assert!(matches!(wigner_numeric(&ss.rho, &[0.0], &[0.0]), Err(Error::ShapeMismatch(_))));
    let h = hamiltonian_full(&params(10.0, 0.0, 0.3, 1.0, 0.0), 6);
    assert!(h.spin);
}

use super::*;
use crate::lindblad::{steady_state_branch, steady_state_full, Cutoff};

fn params(eta: f64, mu: f64, g: f64, g1: f64, g2: f64) -> ModelParams {
    ModelParams::normalized(eta, mu, g, g1, g2).unwrap()
}

#[test]
fn no_coupling_gives_bare_spin_split() {
    let p = params(10.0, 0.0, 0.0, 1.0, 0.0);
    let n = 6;
    let mut m = Mat::zeros(2 * n, 2 * n);
    m[(0, 0)] = cr(0.3);
    m[(1, 1)] = cr(0.1);
    m[(n, n)] = cr(0.6);
    m[(0, n)] = cr(0.05);
    m[(n, 0)] = cr(0.05);
    let rho = DensityMatrix { matrix: m, spin: true, cutoff: n };
    for scheme in [Scheme::ExactUS, Scheme::LinearUS1] {
        let dec = extract_branches(&rho, &p, scheme).unwrap();
        assert!((dec.p_plus - 0.4).abs() < 1e-14);
        assert!((dec.p_minus - 0.6).abs() < 1e-14);
        assert!((dec.branch(Branch::Plus).unwrap().matrix[(0, 0)].re - 0.75).abs() < 1e-14);
        assert!((dec.discarded_coherence - 0.05).abs() < 1e-14);
    }
}

#[test]
fn empty_branch_reported() {
    let p = params(10.0, 0.0, 0.0, 1.0, 0.0);
    let n = 4;
    let mut m = Mat::zeros(2 * n, 2 * n);
    m[(n, n)] = cr(1.0);
    let dec = extract_branches(&DensityMatrix { matrix: m, spin: true, cutoff: n }, &p, Scheme::ExactUS).unwrap();
    assert!(matches!(dec.branch(Branch::Plus), Err(Error::DegenerateWeight(_))));
    assert!(dec.branch(Branch::Minus).is_ok());
}

#[test]
fn weights_sum_and_spin_diagonal_consistency() {
    let p = params(20.0, 0.0, 1.1, 1.0, 0.3);
    let ss = steady_state_full(&p, Cutoff::Fixed(24)).unwrap();
    let dec = extract_branches(&ss.rho, &p, Scheme::ExactUS).unwrap();
    assert!((dec.p_plus + dec.p_minus - 1.0).abs() < 1e-10);
    // A = |s⟩⟨s| ⊗ x² in the rotated frame
    let n_c = 24;
    let x = ops::position(n_c).matrix;
    let x2 = &x * &x;
    let u = ops::adiabatic_unitary(&p, n_c, UnitaryKind::Exact).unwrap();
    let mut total = 0.0;
    for (s, b) in [(0usize, Branch::Plus), (1, Branch::Minus)] {
        let mut proj = Mat::zeros(2, 2);
        proj[(s, s)] = cr(1.0);
        let a = linalg::kron(&proj, &x2);
        let lab = &(&u.matrix * &a) * &linalg::dagger(&u.matrix);
        let direct = linalg::expect(&lab, &ss.rho.matrix).re;
        let via = dec.weight(b) * linalg::expect(&x2, &dec.branch(b).unwrap().matrix).re;
        assert!((direct - via).abs() < 1e-10);
        total += via;
    }
    assert!(total > 0.0);
    for b in Branch::BOTH {
        let r = dec.branch(b).unwrap();
        assert!((r.trace() - 1.0).abs() < 1e-10);
        assert!(r.min_eigenvalue().unwrap() > -1e-8);
    }
}

#[test]
fn weights_continuous_at_weak_coupling() {
    let n_c = 10;
    let w: Vec<f64> = [1e-3, 2e-3, 4e-3]
        .iter()
        .map(|&g| {
            let p = params(10.0, 0.0, g, 1.0, 0.0);
            let ss = steady_state_full(&p, Cutoff::Fixed(n_c)).unwrap();
            extract_branches(&ss.rho, &p, Scheme::ExactUS).unwrap().p_plus
        })
        .collect();
    assert!((w[0] - w[1]).abs() < 1e-3 && (w[1] - w[2]).abs() < 1e-3, "{w:?}");
}

#[test]
fn exact_and_linearized_extraction_agree_in_normal_phase() {
    let p = params(250.0, 0.0, 1.0, 1.0, 0.1);
    let ss = steady_state_full(&p, Cutoff::Fixed(24)).unwrap();
    let n = |s: Scheme| lindblad::observables(extract_branches(&ss.rho, &p, s).unwrap().branch(Branch::Minus).unwrap()).n;
    let (a, b) = (n(Scheme::ExactUS), n(Scheme::LinearUS1));
    assert!(((a - b) / a).abs() < 0.01, "{a} {b}");
}

#[test]
fn perturbative_ratio_examples() {
    let p = params(100.0, 2.0, 1.7, 0.1, 44.26);
    assert_eq!(spin_weight_ratio_perturbative(3.0, 3.0, &p).unwrap(), 1.0);
    let p0 = p.with_gamma2(0.0);
    assert_eq!(spin_weight_ratio_perturbative(50.0, 3.0, &p0).unwrap(), 1.0);
    assert!(spin_weight_ratio_perturbative(200.0, 2.0, &p).unwrap() < 0.05);
    let q = params(100.0, 2.0, 1.7, 0.0, 1.0);
    assert_eq!(spin_weight_ratio_perturbative(0.0, 1.0, &q), Err(Error::ZeroDenominator));
}

#[test]
fn complete_ratio_reduces_to_perturbative_in_normal_phase() {
    let p = params(250.0, 0.0, 1.0, 1.0, 0.1);
    let n_c = 30;
    let sp = steady_state_branch(&p, Branch::Plus, Cutoff::Fixed(n_c)).unwrap();
    let sm = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(n_c)).unwrap();
    let r6 = spin_weight_ratio_complete(&sp.rho, &sm.rho, &p).unwrap();
    let r5 = spin_weight_ratio_perturbative(sp.observables.n, sm.observables.n, &p).unwrap();
    assert!(((r6 - r5) / r5).abs() < 0.01, "{r6} {r5}");
    assert!(perturbative_validity(&sm.rho, &p) < 0.05);
}

#[test]
fn complete_ratio_without_coupling_is_degenerate() {
    let p = params(50.0, 0.0, 0.0, 1.0, 0.1);
    let sp = steady_state_branch(&p, Branch::Plus, Cutoff::Fixed(8)).unwrap();
    let sm = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(8)).unwrap();
    assert_eq!(spin_weight_ratio_complete(&sp.rho, &sm.rho, &p), Err(Error::ZeroDenominator));
    let (r, src) = spin_weights(&p, None, &sp.rho, &sm.rho).unwrap();
    assert_eq!(src, WeightSource::Perturbative);
    assert_eq!(r, 1.0);
}

#[test]
fn mixture_limits() {
    let p = params(100.0, 0.0, 1.2, 1.0, 0.1);
    let n_c = 30;
    let sp = steady_state_branch(&p, Branch::Plus, Cutoff::Fixed(n_c)).unwrap();
    let sm = steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(n_c)).unwrap();
    let m = mixture_observables(&p, 0.0, &sp.rho, &sm.rho, MixtureFrame::Rotated).unwrap();
    assert_eq!(m.n, sm.observables.n);
    assert!(m.sz < -0.9);
    let same = mixture_observables(&p, 0.5, &sm.rho, &sm.rho, MixtureFrame::Rotated).unwrap();
    assert!((same.n - sm.observables.n).abs() < 1e-14);
    assert!(same.sz.abs() < 1e-14);
    let lab = mixture_observables(&p, 0.3, &sp.rho, &sm.rho, MixtureFrame::Lab).unwrap();
    let rot = mixture_observables(&p, 0.3, &sp.rho, &sm.rho, MixtureFrame::Rotated).unwrap();
    assert!((lab.sz - rot.sz).abs() < 1e-10);
    assert!(((lab.n - rot.n) / rot.n).abs() < 0.05);
    assert_eq!(weights_from_ratio(1.0), (0.5, 0.5));
}

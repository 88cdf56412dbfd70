use super::*;
use crate::quad::integrate;
use proptest::prelude::*;

fn params(eta: f64, mu: f64, g: f64, g1: f64, g2: f64) -> ModelParams {
    ModelParams::normalized(eta, mu, g, g1, g2).unwrap()
}

fn spin_block(m: &CMat, n_c: usize, s: usize, t: usize, keep: usize) -> CMat {
    let rows: Vec<usize> = (0..keep).map(|k| s * n_c + k).collect();
    let cols: Vec<usize> = (0..keep).map(|k| t * n_c + k).collect();
    linalg::submatrix(m, &rows, &cols)
}

#[test]
fn ladder_basics() {
    let a = annihilation(2).matrix;
    assert_eq!(a[(0, 1)], ONE);
    assert_eq!(a[(0, 0)], ZERO);
    assert_eq!(a[(1, 0)], ZERO);
    let a = annihilation(7);
    let n = &linalg::dagger(&a.matrix) * &a.matrix;
    for i in 0..7 {
        assert!((n[(i, i)] - cr(i as f64)).norm() < 1e-14);
    }
    assert!(linalg::max_abs(&linalg::sub(&n, &number(7).matrix)) < 1e-14);
}

#[test]
fn canonical_commutator_in_interior() {
    let n_c = 20;
    let c = linalg::commutator(&position(n_c).matrix, &momentum(n_c).matrix);
    let idx: Vec<usize> = (0..n_c - 1).collect();
    let block = linalg::submatrix(&c, &idx, &idx);
    let target = linalg::scale(&linalg::identity(n_c - 1), I);
    assert!(linalg::max_abs(&linalg::sub(&block, &target)) < 1e-13);
}

#[test]
fn full_hamiltonian_decoupled_limit() {
    let n_c = 8;
    let p = params(30.0, 0.0, 0.0, 1.0, 0.0);
    let h = hamiltonian_full(&p, n_c).matrix;
    for s in 0..2 {
        for m in 0..n_c {
            let shift = if s == 0 { 15.0 } else { -15.0 };
            assert!((h[(s * n_c + m, s * n_c + m)] - cr(m as f64 + shift)).norm() < 1e-13);
        }
    }
    assert_eq!(linalg::max_abs(&spin_block(&h, n_c, 0, 1, n_c)), 0.0);
}

#[test]
fn ground_energy_matches_second_order() {
    let p = params(50.0, 0.0, 0.05, 0.0, 0.0);
    let r = p.raw_rates();
    let ev = linalg::hermitian_eigenvalues(&hamiltonian_full(&p, 30).matrix).unwrap();
    let pt = -r.omega / 2.0 - r.lambda * r.lambda / (r.omega + p.omega0);
    assert!(((ev[0] - pt) / pt).abs() < 1e-6, "{} vs {}", ev[0], pt);
}

#[test]
fn branch_hamiltonian_without_coupling() {
    let n_c = 12;
    let p = params(40.0, 0.4, 0.0, 1.0, 0.0);
    for b in Branch::BOTH {
        let h = hamiltonian_branch(&p, b, n_c).unwrap().matrix;
        let mut expect = amplified_oscillator(&p, n_c);
        for i in 0..n_c {
            expect[(i, i)] += cr(b.sign() * 20.0);
        }
        assert!(linalg::max_abs(&linalg::sub(&h, &expect)) < 1e-12);
    }
}

#[test]
fn v_nl_commutes_with_position() {
    let p = params(80.0, 0.0, 1.3, 1.0, 0.0);
    let spec = PositionSpectrum::new(60).unwrap();
    let v = linalg::to_complex(&v_nl(&p, &spec));
    let c = linalg::commutator(&v, &position(60).matrix);
    assert!(linalg::max_abs(&c) < 1e-10);
}

#[test]
fn v_nl_vacuum_element_matches_quadrature() {
    let p = params(100.0, 0.0, 1.0, 1.0, 0.0);
    let spec = PositionSpectrum::new(120).unwrap();
    let v = v_nl(&p, &spec);
    let q = integrate(
        |x| v_nl_scalar(x, &p) * (-x * x).exp() / std::f64::consts::PI.sqrt(),
        -12.0,
        12.0,
        1e-14,
        1e-14,
    );
    assert!(((v[(0, 0)] - q.value) / q.value).abs() < 1e-8, "{} {}", v[(0, 0)], q.value);
}

#[test]
fn v_nl_bounded_below() {
    let p = params(20.0, 0.0, 2.5, 1.0, 0.0);
    let spec = PositionSpectrum::new(50).unwrap();
    let ev = linalg::hermitian_eigenvalues(&linalg::to_complex(&v_nl(&p, &spec))).unwrap();
    assert!(ev[0] >= 10.0 - 1e-9);
}

#[test]
fn branch_spectrum_converges_with_cutoff() {
    let p = params(50.0, 0.3, 0.8, 1.0, 0.0);
    for b in Branch::BOTH {
        let lo = linalg::hermitian_eigenvalues(&hamiltonian_branch(&p, b, 80).unwrap().matrix).unwrap();
        let hi = linalg::hermitian_eigenvalues(&hamiltonian_branch(&p, b, 160).unwrap().matrix).unwrap();
        for k in 0..10 {
            assert!(((lo[k] - hi[k]) / hi[k]).abs() < 1e-8, "{b:?} {k}: {} {}", lo[k], hi[k]);
        }
    }
}

#[test]
fn perturbative_hamiltonian_structure() {
    let n_c = 24;
    let p = params(60.0, 0.5, 0.0, 1.0, 0.0);
    let h = hamiltonian_perturbative(&p, n_c).matrix;
    let h0 = hamiltonian_full(&p, n_c).matrix;
    assert!(linalg::max_abs(&linalg::sub(&h, &h0)) < 1e-12);
    let p = p.with_g(1.1);
    let h = hamiltonian_perturbative(&p, n_c).matrix;
    let sz = kron(&sigma_z(), &linalg::identity(n_c));
    assert!(linalg::max_abs(&linalg::commutator(&h, &sz)) < 1e-12);
    assert!(linalg::hermiticity_defect(&h) < 1e-12);
}

#[test]
fn perturbative_matches_expanded_branch_potential() {
    let n_c = 60;
    let p = params(70.0, 0.2, 0.9, 1.0, 0.0);
    let h = hamiltonian_perturbative(&p, n_c).matrix;
    let spec = PositionSpectrum::new(n_c).unwrap();
    let (g, eta, w) = (p.g, p.eta, p.omega0);
    let series = spec.apply(|x| {
        let z = g * g * x * x / eta;
        0.5 * w * eta * (1.0 + z - z * z / 2.0 + z * z * z / 2.0)
    });
    let keep = n_c - guard_band(n_c);
    for (s, b) in [(0, Branch::Plus), (1, Branch::Minus)] {
        let mut expect = amplified_oscillator(&p, n_c);
        for j in 0..n_c {
            for i in 0..n_c {
                expect[(i, j)] += cr(b.sign() * series[(i, j)]);
            }
        }
        let idx: Vec<usize> = (0..keep).collect();
        let diff = linalg::sub(&spin_block(&h, n_c, s, s, keep), &linalg::submatrix(&expect, &idx, &idx));
        assert!(linalg::op_norm(&diff).unwrap() < 1e-10, "{}", linalg::op_norm(&diff).unwrap());
    }
}

#[test]
fn rotation_is_identity_without_coupling() {
    let p = params(50.0, 0.0, 0.0, 1.0, 0.0);
    for kind in [UnitaryKind::Exact, UnitaryKind::Linearized] {
        let u = adiabatic_unitary(&p, 16, kind).unwrap();
        assert!(linalg::max_abs(&linalg::sub(&u.matrix, &linalg::identity(32))) < 1e-13);
    }
}

#[test]
fn rotation_unitary_in_interior() {
    let p = params(100.0, 0.0, 1.5, 1.0, 0.0);
    for kind in [UnitaryKind::Exact, UnitaryKind::Linearized] {
        let u = adiabatic_unitary(&p, 200, kind).unwrap();
        assert!(u.unitarity_defect(20) < 1e-8);
    }
}

#[test]
fn rotation_decouples_spin_to_leading_order() {
    let n_c = 120;
    let g = 1.2;
    let mut ratios = Vec::new();
    for eta in [50.0, 100.0, 200.0] {
        let p = params(eta, 0.3, g, 1.0, 0.0);
        let spec = PositionSpectrum::new(n_c).unwrap();
        let u = adiabatic_unitary_with(&p, &spec, UnitaryKind::Exact);
        let hr = u.conjugate(&hamiltonian_full(&p, n_c).matrix);
        let keep = n_c - guard_band(n_c);
        let off = linalg::op_norm(&spin_block(&hr, n_c, 0, 1, keep)).unwrap();
        let idx: Vec<usize> = (0..keep).collect();
        let v = linalg::op_norm(&linalg::submatrix(&linalg::to_complex(&v_nl(&p, &spec)), &idx, &idx)).unwrap();
        assert!(off / v < 5.0 / eta, "η={eta}: {}", off / v);
        ratios.push(off / v);
    }
    assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2]);
}

#[test]
fn projected_rotation_reproduces_branch_hamiltonians() {
    let n_c = 100;
    let keep = 40;
    let mut errs = Vec::new();
    for eta in [50.0, 200.0, 800.0] {
        let p = params(eta, 0.3, 1.0, 1.0, 0.0);
        let spec = PositionSpectrum::new(n_c).unwrap();
        let u = adiabatic_unitary_with(&p, &spec, UnitaryKind::Exact);
        let hr = u.conjugate(&hamiltonian_full(&p, n_c).matrix);
        let mut worst = 0.0f64;
        for (s, b) in [(0, Branch::Plus), (1, Branch::Minus)] {
            let hb = hamiltonian_branch_with(&p, b, &spec).matrix;
            let idx: Vec<usize> = (0..keep).collect();
            let diff = linalg::sub(&spin_block(&hr, n_c, s, s, keep), &linalg::submatrix(&hb, &idx, &idx));
            worst = worst.max(linalg::op_norm(&diff).unwrap());
        }
        errs.push(worst);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn epsilon_profile() {
    let p = params(100.0, 0.0, 1.3, 1.0, 0.0);
    assert!((epsilon_scalar(0.0, &p) - 1.3 / 20.0).abs() < 1e-15);
    let e = epsilon_operator(&p, 80).unwrap();
    assert!(linalg::op_norm(&e.matrix).unwrap() <= 1.3 / 20.0 + 1e-14);
    let far = [1e3, 1e4];
    let k: Vec<f64> = far.iter().map(|&x| epsilon_scalar(x, &p) * x * x).collect();
    assert!(((k[0] - k[1]) / k[1]).abs() < 1e-4);
}

#[test]
fn jumps_without_coupling() {
    let p = params(100.0, 0.0, 0.0, 1.0, 0.0);
    let (c1, c2) = transformed_jumps(&p, 10).unwrap();
    let a = annihilation(10).matrix;
    let id2 = linalg::identity(2);
    assert!(linalg::max_abs(&linalg::sub(&c1.matrix, &kron(&id2, &a))) < 1e-15);
    assert!(linalg::max_abs(&linalg::sub(&c2.matrix, &kron(&id2, &(&a * &a)))) < 1e-15);
}

#[test]
fn jumps_match_direct_conjugation() {
    let n_c = 200;
    let p = params(100.0, 0.0, 1.0, 1.0, 0.0);
    let u = adiabatic_unitary(&p, n_c, UnitaryKind::Exact).unwrap();
    let (c1, c2) = transformed_jumps(&p, n_c).unwrap();
    let a = kron(&linalg::identity(2), &annihilation(n_c).matrix);
    let idx = interior_indices(n_c, true, guard_band(n_c));
    let direct1 = linalg::submatrix(&u.conjugate(&a), &idx, &idx);
    let direct2 = linalg::submatrix(&u.conjugate(&(&a * &a)), &idx, &idx);
    let d1 = linalg::max_abs(&linalg::sub(&direct1, &linalg::submatrix(&c1.matrix, &idx, &idx)));
    let d2 = linalg::max_abs(&linalg::sub(&direct2, &linalg::submatrix(&c2.matrix, &idx, &idx)));
    assert!(d1 < 1e-6, "{d1}");
    assert!(d2 < 1e-6, "{d2}");
}

#[test]
fn two_photon_jump_leading_order() {
    let n_c = 120;
    let keep = 30;
    let mut norms = Vec::new();
    for eta in [100.0, 400.0] {
        let p = params(eta, 0.0, 1.0, 1.0, 0.0);
        let (_, c2) = transformed_jumps(&p, n_c).unwrap();
        let a = annihilation(n_c).matrix;
        let lead = linalg::sub(
            &kron(&linalg::identity(2), &(&a * &a)),
            &kron(&linalg::scale(&sigma_y(), I * (p.g / eta.sqrt())), &a),
        );
        let idx = interior_indices(n_c, true, n_c - keep);
        let corr = linalg::submatrix(&linalg::sub(&c2.matrix, &lead), &idx, &idx);
        norms.push(linalg::op_norm(&corr).unwrap());
    }
    // O(η⁻¹) or faster
    assert!(norms[1] * 400.0 < 1.05 * norms[0] * 100.0, "{norms:?}");
}

#[test]
fn binary_dump_round_trip() {
    let h = hamiltonian_full(&params(10.0, 0.7, 0.9, 1.0, 0.0), 5);
    let mut buf = Vec::new();
    h.write_binary(&mut buf).unwrap();
    assert_eq!(buf.len(), 16 + 16 * 100);
    let back = FockOperator::read_matrix(&mut buf.as_slice()).unwrap();
    assert_eq!(linalg::max_abs(&linalg::sub(&back, &h.matrix)), 0.0);
}

#[test]
fn cutoff_for_vacuum() {
    let p = params(50.0, 0.0, 0.0, 1.0, 0.1);
    let n = cutoff_select(&p, CutoffTarget::Branch(Branch::Minus), &CutoffConfig::default()).unwrap();
    assert_eq!(n, 32);
}

#[test]
fn cutoff_tails_decrease_near_gc() {
    let p = params(100.0, 0.0, 1.3, 1.0, 0.1);
    let cfg = CutoffConfig { start: 16, ..CutoffConfig::default() };
    let (n, hist) = cutoff_select_with_tails(&p, CutoffTarget::Branch(Branch::Minus), &cfg).unwrap();
    assert!(hist.windows(2).all(|w| w[1].1 < w[0].1), "{hist:?}");
    let ss = crate::lindblad::steady_state_branch(&p, Branch::Minus, crate::lindblad::Cutoff::Fixed(n)).unwrap();
    let dx2 = ss.observables.dx2;
    assert!(dx2 > 1.0);
    assert!((n as f64) < 40.0 * dx2 + 64.0, "n_c={n} Δx²={dx2}");
}

#[test]
fn cutoff_limit_in_deep_superradiance() {
    let p = params(1e4, 0.0, 3.0, 1.0, 0.1);
    let cfg = CutoffConfig { hard_max: 64, ..CutoffConfig::default() };
    assert_eq!(
        cutoff_select(&p, CutoffTarget::Branch(Branch::Minus), &cfg),
        Err(Error::CutoffLimit(64))
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hamiltonians_hermitian(eta in 1.0f64..500.0, mu in -2.0f64..3.0, g in 0.0f64..3.0, n_c in 2usize..30) {
        let p = params(eta, mu, g, 1.0, 0.0);
        prop_assert!(linalg::hermiticity_defect(&hamiltonian_full(&p, n_c).matrix) < 1e-12);
        prop_assert!(linalg::hermiticity_defect(&hamiltonian_perturbative(&p, n_c).matrix) < 1e-12 * (1.0 + g.powi(6) * (n_c as f64).powi(3)));
        for b in Branch::BOTH {
            prop_assert!(linalg::hermiticity_defect(&hamiltonian_branch(&p, b, n_c).unwrap().matrix) < 1e-12);
        }
    }
}


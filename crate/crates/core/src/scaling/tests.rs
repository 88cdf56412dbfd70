use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn fig2_base() -> ModelParams {
    ModelParams::normalized(2500.0, 2.0, 1.0, 0.1, 44.26).unwrap()
}

#[test]
fn noiseless_fit_is_exact() {
    let xs = geomspace(1e3, 1e5, 9);
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.sqrt()).collect();
    let r = fit_loglog(&xs, &ys).unwrap();
    assert!((r.slope - 0.5).abs() < 1e-12);
    assert!((r.intercept - 3f64.ln()).abs() < 1e-10);
    assert!(r.r_squared > 1.0 - 1e-12);
}

#[test]
fn noisy_fit_slope() {
    let xs = geomspace(1e3, 1e5, 20);
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 3.0 * x.sqrt() * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let r = fit_loglog(&xs, &ys).unwrap();
        worst = worst.max((r.slope - 0.5).abs());
        assert!(r.slope_stderr < 0.01);
    }
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn fit_error_paths() {
    assert_eq!(fit_loglog(&[1.0], &[2.0]).unwrap_err(), Error::InsufficientData { needed: 5, got: 1 });
    assert_eq!(fit_loglog(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, -2.0, 3.0, 4.0, 5.0]).unwrap_err(), Error::NonPositiveData);
}

#[test]
fn lambda_zero_is_closed_form() {
    let base = fig2_base();
    let g2 = solve_gamma2_for_lambda(0.0, 2500.0, &base).unwrap();
    let gc = critical_coupling_gc(&base).unwrap();
    let closed = langevin::langevin_tricritical_gamma2(&base.with_g(gc)).unwrap();
    assert!((g2 - closed).abs() < 1e-9 * closed);
    assert!((g2 - 44.70).abs() < 5e-3, "{g2}");
}

#[test]
fn lambda_root_residual() {
    let base = fig2_base();
    for &(target, eta) in &[(0.3, 1e4), (0.6, 3e4), (-1.0, 1e4), (1e-3, 5e4)] {
        let g2 = solve_gamma2_for_lambda(target, eta, &base).unwrap();
        let lam = lambda_of_gamma2(&base.with_eta(eta), g2).unwrap();
        assert!((lam - target).abs() < 1e-10 * target.abs().max(1.0), "{lam} vs {target}");
    }
    assert_eq!(solve_gamma2_for_lambda(1e9, 1e4, &base).unwrap_err(), Error::NoBracket);
}

#[test]
fn derived_fields_round_trip() {
    let base = fig2_base().with_g(1.75);
    let s = ScalingSample::new(&base, Backend::Quadrature, Ok(3.25)).unwrap();
    let r = s.recompute().unwrap();
    assert_eq!(s, r);
    assert!(s.l > 0.0);
    let gc = critical_coupling_gc(&base).unwrap();
    assert_eq!(s.theta, (1.75 - gc).abs() * s.l.powf(2.0 / 3.0));
    assert_eq!(s.ftilde, 3.25 / s.l.powf(2.0 / 3.0));
    let failed = ScalingSample::new(&base, Backend::MasterEq, Err(Error::SingularSystem)).unwrap();
    assert!(!failed.is_ok() && failed.dx2.is_nan());
    assert_eq!(failed.recompute().unwrap().status, failed.status);
}

#[test]
fn scan_preconditions() {
    let base = fig2_base();
    let cfg = BackendConfig::default();
    assert!(matches!(finite_size_scan(&base, &[1e3, 2e3], Backend::Quadrature, &cfg), Err(Error::Config(_))));
    assert!(matches!(finite_size_scan(&base, &[1e3, -1.0, 1e4], Backend::Quadrature, &cfg), Err(Error::Config(_))));
    let gc = critical_coupling_gc(&base).unwrap();
    let narrow: Vec<f64> = [1e-3, 3e-3, 1e-2].iter().map(|d| gc + d).collect();
    assert!(matches!(critical_exponent_scan(&base, &narrow, Backend::Quadrature, &cfg), Err(Error::Config(_))));
}

#[test]
fn tricritical_zeta_quadrature() {
    let base = fig2_base();
    let gc = critical_coupling_gc(&base).unwrap();
    let base = base.with_gamma2(langevin::langevin_tricritical_gamma2(&base.with_g(gc)).unwrap());
    let s = finite_size_scan(&base, &geomspace(1e3, 1e5, 9), Backend::Quadrature, &BackendConfig::default()).unwrap();
    let r = zeta_report(&s).unwrap();
    assert!((r.slope - 2.0 / 3.0).abs() < 0.02, "{}", r.slope);
    assert_eq!(r.documented, Some(TRICRITICAL_EXPONENTS));
}

#[test]
fn closed_form_nu_is_one() {
    let base = ModelParams::normalized(1e6, 2.0, 1.0, 0.1, 1.0).unwrap();
    let gc = critical_coupling_gc(&base).unwrap();
    let xs = geomspace(1e-4, 1e-2, 7);
    let ys: Vec<f64> = xs
        .iter()
        .map(|d| langevin::closed_form_moments(&base.with_g(gc + d), langevin::Regime::NearCritical).unwrap().x2)
        .collect();
    // ⟨x²⟩ ∝ 1/(g² − g_c²) = 1/(δ(2g_c + δ))
    let r = fit_loglog(&xs, &ys).unwrap();
    assert!((r.slope + 1.0).abs() < 5e-3, "{}", r.slope);
}

#[test]
fn spread_groups_by_lambda_and_theta() {
    let base = fig2_base();
    let mk = |g: f64, eta: f64, dx2: f64| ScalingSample::new(&base.with_eta(eta).with_g(g), Backend::Quadrature, Ok(dx2)).unwrap();
    let a = mk(1.74, 1e4, 10.0);
    let mut b = a.clone();
    b.ftilde *= 1.02;
    let bins = collapse_spread(&[a.clone(), b, mk(1.9, 1e4, 1.0)], 1e-6);
    assert_eq!(bins.len(), 1);
    assert!((bins[0].spread - 0.02 / 1.01).abs() < 1e-12);
}

#[test]
fn csv_columns() {
    let s = ScalingSample::new(&fig2_base(), Backend::MasterEq, Ok(1.5)).unwrap();
    let mut buf = Vec::new();
    write_samples_csv(&[s], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "eta,g,gamma2,backend,dx2,L,Theta,Lambda,Ftilde,status");
    assert!(lines.next().unwrap().ends_with(",ok"));
    assert_eq!("ensemble".parse::<Backend>().unwrap(), Backend::Ensemble);
    assert!("magic".parse::<Backend>().is_err());
}

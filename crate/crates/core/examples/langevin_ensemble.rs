//! Ensemble of the semiclassical Langevin equations at the Langevin
//! tricritical point, compared with the Boltzmann moments.

use rabi_dpt::langevin::{self, EnsembleConfig, PotentialForm};
use rabi_dpt::meanfield::critical_coupling_gc;
use rabi_dpt::{Branch, ModelParams};

fn main() -> rabi_dpt::Result<()> {
    let eta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2500.0);
    let t_max: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2000.0);
    let base = ModelParams::normalized(eta, 2.0, 1.0, 0.1, 0.0)?;
    let p = base.with_g(critical_coupling_gc(&base)?);
    let p = p.with_gamma2(langevin::langevin_tricritical_gamma2(&p)?);
    let q = langevin::moments_quadrature(&p, Branch::Minus, PotentialForm::Exact, &[(0, 2), (2, 0)])?;
    let cfg = EnsembleConfig { n_traj: 32, t_burn: 200.0, t_max, seed: 1, ..Default::default() };
    let s = langevin::simulate_ensemble(&p, Branch::Minus, &cfg)?;
    println!("g = {:.4}, gamma2 = {:.3}, dt = {:.2e}", p.g, p.gamma2, s.dt);
    println!("<x^2>: ensemble {:.4} ± {:.4}, Boltzmann {:.4}", s.x2.mean, s.x2.stderr, q[0]);
    println!("<p^2>: ensemble {:.4} ± {:.4}, Boltzmann {:.4}", s.p2.mean, s.p2.stderr, q[1]);
    Ok(())
}

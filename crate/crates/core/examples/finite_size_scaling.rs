//! Finite-frequency exponent ζ at the critical coupling and the critical
//! exponent ν, with the analytic backend and optionally the branch master
//! equation at desk-scale η.
//!
//! Run with `--master` to add the master-equation scan.

use rabi_dpt::langevin;
use rabi_dpt::meanfield::critical_coupling_gc;
use rabi_dpt::roots::geomspace;
use rabi_dpt::scaling::{self, Backend, BackendConfig};
use rabi_dpt::ModelParams;

fn main() -> rabi_dpt::Result<()> {
    let master = std::env::args().any(|a| a == "--master");
    let cfg = BackendConfig::default();

    let second = ModelParams::normalized(1e3, 2.0, 1.0, 1.0, 44.26)?;
    let tcp = {
        let p = ModelParams::normalized(1e3, 2.0, 1.0, 0.1, 0.0)?;
        let gc = critical_coupling_gc(&p)?;
        p.with_gamma2(langevin::langevin_tricritical_gamma2(&p.with_g(gc))?)
    };
    for (name, base) in [("second-order", second), ("tricritical", tcp)] {
        let s = scaling::finite_size_scan(&base, &geomspace(1e3, 1e5, 9), Backend::Quadrature, &cfg)?;
        let r = scaling::zeta_report(&s)?;
        println!("{name:>12}: quadrature zeta = {:.4} ± {:.4}", r.slope, r.slope_stderr);
        if master {
            let s = scaling::finite_size_scan(&base, &geomspace(100.0, 800.0, 5), Backend::MasterEq, &cfg)?;
            let r = scaling::zeta_report(&s)?;
            println!("{name:>12}: master     zeta = {:.4} ± {:.4}", r.slope, r.slope_stderr);
            for x in &s {
                println!("    eta = {:>6.0}  dx2 = {:.4}", x.eta, x.dx2);
            }
        }
    }

    let nu_base = ModelParams::normalized(1e6, 2.0, 1.0, 1.0, 2.0)?;
    let gc = critical_coupling_gc(&nu_base)?;
    let g_list: Vec<f64> = geomspace(1e-4, 1e-2, 9).iter().map(|d| gc + d).collect();
    let (r, _) = scaling::critical_exponent_scan(&nu_base, &g_list, Backend::Quadrature, &cfg)?;
    println!("quadrature nu = {:.4} ± {:.4}", r.exponent, r.slope_stderr);
    Ok(())
}

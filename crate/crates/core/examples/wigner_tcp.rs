//! Wigner function of the (−) branch steady state at the Langevin
//! tricritical point next to the Boltzmann form, written as CSV grids.

use rabi_dpt::langevin::{self, Boltzmann, PotentialForm};
use rabi_dpt::lindblad::{self, Cutoff, WignerGrid};
use rabi_dpt::meanfield::critical_coupling_gc;
use rabi_dpt::ops::CutoffConfig;
use rabi_dpt::roots::linspace;
use rabi_dpt::{Branch, ModelParams};

fn main() -> rabi_dpt::Result<()> {
    let eta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100.0);
    let base = ModelParams::normalized(eta, 2.0, 1.0, 0.1, 0.0)?;
    let p = base.with_g(critical_coupling_gc(&base)?);
    let p = p.with_gamma2(langevin::langevin_tricritical_gamma2(&p)?);
    let ss = lindblad::steady_state_branch(&p, Branch::Minus, Cutoff::Auto(CutoffConfig::default()))?;
    let xs = linspace(-12.0, 12.0, 145);
    let ps = linspace(-5.0, 5.0, 61);
    let num = lindblad::wigner_numeric(&ss.rho, &xs, &ps)?;
    let bz = Boltzmann::new(&p, Branch::Minus, PotentialForm::Exact)?;
    let ana = WignerGrid {
        w: xs.iter().map(|&x| ps.iter().map(|&q| bz.wigner(x, q)).collect()).collect(),
        x: xs.clone(),
        p: ps.clone(),
    };
    let dir = std::env::temp_dir();
    num.save_csv(&dir.join("wigner_numeric.csv"))?;
    ana.save_csv(&dir.join("wigner_boltzmann.csv"))?;
    let diff = num.w.iter().flatten().zip(ana.w.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("eta = {eta}, g = {:.4}, gamma2 = {:.3}, n_c = {}", p.g, p.gamma2, ss.n_c);
    println!("integrals: numeric {:.5}, Boltzmann {:.5}", num.integral(), ana.integral());
    println!("peaks: numeric {:.4}, Boltzmann {:.4}; max |difference| {:.4}", num.max_abs(), ana.max_abs(), diff);
    println!("dx2: master {:.4}, Boltzmann {:.4}", ss.observables.dx2, bz.moment(0, 2)?);
    println!("grids written to {}", dir.display());
    Ok(())
}

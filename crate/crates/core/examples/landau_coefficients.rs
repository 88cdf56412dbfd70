//! Landau coefficients of the mean-field and Langevin potentials near the
//! critical coupling, and the tetracritical search.

use rabi_dpt::langevin::{self, PotentialForm};
use rabi_dpt::meanfield;
use rabi_dpt::roots::linspace;
use rabi_dpt::{Branch, ModelParams};

fn main() -> rabi_dpt::Result<()> {
    let base = ModelParams::normalized(2500.0, 2.0, 0.0, 0.1, 44.26)?;
    let gc = meanfield::critical_coupling_gc(&base)?;
    println!("g_c = {gc:.6}");
    println!("{:>8} {:>11} {:>11} {:>11} {:>11}", "g", "c2", "c4", "C2", "C4");
    for g in linspace(gc - 0.05, gc + 0.05, 5) {
        let p = base.with_g(g);
        let c = langevin::landau_c(&p)?;
        println!(
            "{g:>8.4} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}",
            meanfield::c2_closed(&p, Branch::Minus),
            meanfield::c4_closed(&p, Branch::Minus),
            c.c2,
            c.c4
        );
    }
    let p = base.with_g(gc);
    println!(
        "tricritical gamma2: mean-field {:.4}, Langevin {:.4}",
        meanfield::tricritical_gamma2(&p)?,
        langevin::langevin_tricritical_gamma2(&p)?
    );
    let u2 = langevin::effective_potential_u(0.1, &p, Branch::Minus, PotentialForm::Exact);
    println!("U(0.1) at g_c = {u2:.4e}");
    println!("{:>5} {:>12} {:>12} {:>7}", "mu", "gamma1^2 a", "gamma1^2 b", "exists");
    for row in meanfield::tetracritical_scan(&linspace(1.5, 10.0, 6)) {
        println!("{:>5.2} {:>12.4e} {:>12.4e} {:>7}", row.mu, row.gamma1_sq[0], row.gamma1_sq[1], row.exists);
    }
    Ok(())
}

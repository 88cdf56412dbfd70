//! Stable mean-field steady state of each branch against g, on both sides
//! of the tricritical γ₂, with the first-order boundary when there is one.

use rabi_dpt::meanfield::{self, RootGrid};
use rabi_dpt::roots::linspace;
use rabi_dpt::{Branch, ModelParams};

fn main() -> rabi_dpt::Result<()> {
    let base = ModelParams::normalized(100.0, 2.0, 0.0, 0.1, 0.0)?;
    let gc = meanfield::critical_coupling_gc(&base)?;
    let g2c = meanfield::tricritical_gamma2(&base.with_g(gc))?;
    let grid = RootGrid::default();
    for factor in [0.5, 2.0] {
        let p = base.with_gamma2(factor * g2c);
        println!("gamma2 = {:.3} ({factor} x tricritical)", p.gamma2);
        println!("{:>8} {:>6} {:>12} {:>10}", "g", "phase", "n_mf", "s_z");
        for g in linspace(gc - 0.3, gc + 0.3, 13) {
            let r = meanfield::classify_phase(&p.with_g(g), Branch::Minus, &grid)?;
            println!("{g:>8.4} {:>6} {:>12.5e} {:>10.5}", r.phase.label(), r.n_mf, r.sz);
        }
        match meanfield::first_order_boundary(&p, Branch::Minus, (gc - 0.5, gc + 0.5)) {
            Ok(g_star) => println!("first-order boundary at g* = {g_star:.5}\n"),
            Err(e) => println!("no first-order boundary: {e}\n"),
        }
    }
    Ok(())
}

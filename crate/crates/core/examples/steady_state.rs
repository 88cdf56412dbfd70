//! Lindblad steady states of the decoupled (−) branch and of the complete
//! spin-boson model at one parameter point.

use rabi_dpt::lindblad::{self, Cutoff};
use rabi_dpt::ops::CutoffConfig;
use rabi_dpt::{Branch, ModelParams};

fn main() -> rabi_dpt::Result<()> {
    let g: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let p = ModelParams::normalized(100.0, 0.0, g, 1.0, 0.1)?;
    let auto = Cutoff::Auto(CutoffConfig { start: 16, ..Default::default() });
    let br = lindblad::steady_state_branch(&p, Branch::Minus, auto)?;
    let full = lindblad::steady_state_full(&p, auto)?;
    for (name, ss) in [("branch (-)", &br), ("full", &full)] {
        let o = &ss.observables;
        println!(
            "{name:>10}: n_c = {:>3}  residual = {:.1e}  <n> = {:.5}  dx2 = {:.5}  dp2 = {:.5}  |<a>| = {:.1e}",
            ss.n_c, ss.residual, o.n, o.dx2, o.dp2, o.a_abs()
        );
    }
    if let Some(sz) = full.observables.sz {
        println!("full <sigma_z> = {sz:.5}");
    }
    println!("trace = {:.12}, smallest eigenvalue = {:.2e}", full.rho.trace(), full.rho.min_eigenvalue()?);
    Ok(())
}

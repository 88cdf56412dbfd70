//! Splits a full spin-boson steady state into spin branches and compares it
//! with the weighted mixture of independently solved branch states.

use rabi_dpt::adiabatic::{self, MixtureFrame, Scheme};
use rabi_dpt::lindblad::{self, Cutoff};
use rabi_dpt::{Branch, ModelParams};

fn main() -> rabi_dpt::Result<()> {
    let n_c = 40;
    println!("{:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "g", "n full", "n mix", "sz full", "sz mix", "p+ full", "p+ mix");
    for g in [0.4, 0.8, 1.0, 1.2] {
        let p = ModelParams::normalized(100.0, 0.0, g, 1.0, 0.1)?;
        let full = lindblad::steady_state_full(&p, Cutoff::Fixed(n_c))?;
        let dec = adiabatic::extract_branches(&full.rho, &p, Scheme::ExactUS)?;
        let plus = lindblad::steady_state_branch(&p, Branch::Plus, Cutoff::Fixed(n_c))?;
        let minus = lindblad::steady_state_branch(&p, Branch::Minus, Cutoff::Fixed(n_c))?;
        let (r, _) = adiabatic::spin_weights(&p, None, &plus.rho, &minus.rho)?;
        let (p_plus, _) = adiabatic::weights_from_ratio(r);
        let mix = adiabatic::mixture_observables(&p, p_plus, &plus.rho, &minus.rho, MixtureFrame::Lab)?;
        println!(
            "{g:>5.2} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.2e} {:>9.2e}",
            full.observables.n,
            mix.n,
            full.observables.sz.unwrap_or(f64::NAN),
            mix.sz,
            dec.p_plus,
            p_plus
        );
    }
    Ok(())
}

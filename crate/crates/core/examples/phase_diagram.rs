//! Mean-field phases of both spin branches on a (μ, g) grid, printed as a
//! character map. Rows run over μ, columns over g.

use rabi_dpt::meanfield::{self, Phase};
use rabi_dpt::roots::linspace;
use rabi_dpt::ModelParams;

fn glyph(minus: Option<Phase>, plus: Option<Phase>) -> char {
    match (minus, plus) {
        (Some(Phase::Normal), Some(Phase::Normal)) => '.',
        (Some(Phase::Superradiant), Some(Phase::Normal)) => 's',
        (Some(Phase::Superradiant), Some(Phase::Superradiant)) => 'S',
        (Some(Phase::Normal), Some(Phase::Superradiant)) => 'p',
        (Some(Phase::Unstable), _) | (_, Some(Phase::Unstable)) => 'u',
        _ => '?',
    }
}

fn main() -> rabi_dpt::Result<()> {
    let gamma2: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let base = ModelParams::normalized(100.0, 0.0, 0.0, 1.0, gamma2)?;
    let mu = linspace(3.0, -2.0, 26);
    let g = linspace(0.0, 3.0, 61);
    let pts = meanfield::phase_diagram(&mu, &g, &base);
    println!("gamma1 = 1, gamma2 = {gamma2}; '.' NP/NP  's' SRP(-)  'S' SRP both  'p' SRP(+)  'u' unstable");
    for (i, m) in mu.iter().enumerate() {
        let row: String = pts[i * g.len()..(i + 1) * g.len()].iter().map(|q| glyph(q.phase_minus, q.phase_plus)).collect();
        println!("{m:>5.2} {row}");
    }
    let gc = meanfield::critical_coupling_gc(&base.with_mu(2.0))?;
    println!("g_c(mu = 2) = {gc:.6}, tricritical gamma2 = {:.6}", meanfield::tricritical_gamma2(&base.with_mu(2.0).with_g(gc))?);
    Ok(())
}

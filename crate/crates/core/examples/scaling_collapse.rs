//! Θ–Λ collapse of Δx² from the Boltzmann quadrature at three fixed Λ.

use rabi_dpt::roots::geomspace;
use rabi_dpt::scaling::{self, Backend, BackendConfig, CollapseSampling, Field};
use rabi_dpt::ModelParams;

fn main() -> rabi_dpt::Result<()> {
    let base = ModelParams::normalized(2e4, 2.0, 1.0, 0.1, 44.26)?;
    let lambdas = [0.0, 0.2, 0.4];
    let theta = geomspace(1e-3, 10.0, 20);
    let samples = scaling::collapse_dataset(
        &base,
        &lambdas,
        &geomspace(2e4, 1e5, 4),
        &CollapseSampling::Theta(theta),
        Backend::Quadrature,
        &BackendConfig::default(),
    )?;
    let bins = scaling::collapse_spread(&samples, 1e-6);
    let worst = bins.iter().map(|b| b.spread).fold(0.0, f64::max);
    println!("{} samples, {} bins, worst spread {:.2}%", samples.len(), bins.len(), 100.0 * worst);
    for &lam in &lambdas {
        let of = |keep: &dyn Fn(f64) -> bool| -> Vec<_> {
            samples.iter().filter(|s| (s.lambda - lam).abs() < 1e-6 && keep(s.theta)).cloned().collect()
        };
        let tail = scaling::fit_exponent(&of(&|t| t > 0.8), Field::Theta, Field::Ftilde)?;
        let head = of(&|t| t < 1e-2);
        let flat = scaling::fit_exponent(&head, Field::Theta, Field::Ftilde)?;
        println!(
            "Lambda = {lam}: F(0) ~ {:.4}, plateau slope {:+.4}, large-Theta slope {:+.4}",
            head[0].ftilde, flat.slope, tail.slope
        );
    }
    let path = std::env::temp_dir().join("collapse.csv");
    scaling::save_samples_csv(&samples, &path)?;
    println!("samples written to {}", path.display());
    Ok(())
}

//! Renewal probabilities of the pure and the stationary delayed process, and
//! the autocovariance of M superposed chains.

use renewal_arma::lifetime::LifetimeSpec;
use renewal_arma::renewal::{acvf_renewal, adaptive_horizon, renewal_probs_rational, RenewalTable};

pub fn run_example() -> renewal_arma::Result<()> {
    let spec = LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6)?;
    let table = RenewalTable::compute(&spec, 500);
    println!("u_0..u_5 = {:?}", &table.u[..6]);
    println!(
        "nu_0..nu_3 = {:?} (1/mu = {})",
        &table.nu[..4],
        1.0 / table.mu
    );
    println!("max |nu_n - 1/mu| = {:.2e}", table.stationarity_error());

    let fast = renewal_probs_rational(&spec.pgf(), 500);
    let gap = fast
        .iter()
        .zip(&table.u)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("convolution vs rational recursion: {gap:.2e}");

    let m = 5;
    let h = adaptive_horizon(&spec, m, 1e-12, 2000);
    let gamma = acvf_renewal(&spec, m, 6);
    println!("gamma(0..6) = {gamma:?}; below 1e-12 from lag {h}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

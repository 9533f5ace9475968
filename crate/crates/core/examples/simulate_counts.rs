//! Seeded simulation of a binomial count series and comparison of sample
//! statistics with the exact autocovariance and marginal law.

use renewal_arma::lifetime::LifetimeSpec;
use renewal_arma::renewal::acvf_renewal;
use renewal_arma::simulate::{sample_acvf, sample_mean, simulate_counts, SimConfig};
use renewal_arma::stats::{batch_means, chi_square_binomial, DEFAULT_BATCHES};
use renewal_arma::verify::thinning_stride;

pub fn run_example() -> renewal_arma::Result<()> {
    let spec = LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6)?;
    let config = SimConfig {
        spec: spec.clone(),
        m: 5,
        steps: 200_000,
        seed: 42,
    };
    let series = simulate_counts(&config)?;
    println!("first values {:?}", &series.values[..12]);
    println!(
        "mean {:.4} (exact {:.4})",
        sample_mean(&series.values),
        5.0 / spec.mean()
    );

    let exact = acvf_renewal(&spec, 5, 3);
    for (h, target) in exact.iter().enumerate() {
        let est = batch_means(&series.values, DEFAULT_BATCHES, |x| {
            sample_acvf(x, h).map(|g| g[h]).unwrap_or(f64::NAN)
        })?;
        println!(
            "gamma({h}) exact {target:.5} sample {:.5} +- {:.5}",
            est.estimate, est.se
        );
    }

    let stride = thinning_stride(&spec, 5);
    let thinned: Vec<u32> = series.values.iter().step_by(stride).copied().collect();
    let fit = chi_square_binomial(&thinned, 5, 1.0 / spec.mean())?;
    println!(
        "Binomial(5, 1/mu) fit: chi2 {:.2} on {} dof, p {:.3}",
        fit.statistic, fit.dof, fit.p_value
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

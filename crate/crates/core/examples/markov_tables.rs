//! Exact second-order Markov tables for a head of length 2, the trivariate
//! moment generating function, and an empirical Markov-order test.

use renewal_arma::lifetime::LifetimeSpec;
use renewal_arma::markov::{
    conditional_probs_p2, joint_probs_p2, markov_order_test, mgf_trivariate,
};
use renewal_arma::simulate::{chain_rng, simulate_chain};

pub fn run_example() -> renewal_arma::Result<()> {
    let spec = LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6)?;
    let joint = joint_probs_p2(&spec)?;
    let cond = conditional_probs_p2(&spec)?;
    println!("{joint:?}");
    println!("{cond:?}");
    println!(
        "MGF at (0.1, 0.2, 0.3), M = 5: {}",
        mgf_trivariate(&joint, 5, [0.1, 0.2, 0.3])
    );

    let bits = simulate_chain(&spec, 2_000_000, &mut chain_rng(7, 0));
    let report = markov_order_test(&bits, 3)?;
    for order in &report.orders {
        println!(
            "context length {} vs {}: max divergence {:.5}, max z {:.2}",
            order.order + 1,
            order.order,
            order.max_divergence,
            order.max_z
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

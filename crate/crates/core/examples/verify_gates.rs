//! Run every verification gate (analytic and Monte-Carlo) for the ARMA(2,1)
//! running example and print one line per gate.

use std::time::Instant;

use renewal_arma::lifetime::LifetimeSpec;
use renewal_arma::verify::{verify, Level, VerifyOptions};

pub fn run_example() -> renewal_arma::Result<()> {
    let spec = LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6)?;
    let opts = VerifyOptions {
        level: Level::Full,
        ..Default::default()
    };
    let start = Instant::now();
    let report = verify(&spec, 5, &opts)?;
    for g in &report.gates {
        let mark = if g.passed { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<32} {:>12.4e}  threshold {:.1e}  {}",
            g.name, g.measured, g.threshold, g.detail
        );
    }
    println!(
        "{} of {} gates passed in {:.1?}",
        report.gates.iter().filter(|g| g.passed).count(),
        report.gates.len(),
        start.elapsed()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

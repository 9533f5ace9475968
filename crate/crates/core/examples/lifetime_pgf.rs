//! Lifetime laws with a constant hazard after lag p: moments, hazards and the
//! rational generating function.

use renewal_arma::lifetime::{LifetimeSpec, RationalPGF};
use renewal_arma::polynomials::Poly;

pub fn run_example() -> renewal_arma::Result<()> {
    let spec = LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6)?;
    println!("P(L = n), n = 1..6: {:?}", spec.pmf_table(6));
    println!(
        "hazards: {:?}",
        (1..=4)
            .map(|k| spec.hazard(k))
            .collect::<Result<Vec<_>, _>>()?
    );
    println!("mean {} variance {}", spec.mean(), spec.variance());

    let pgf = spec.pgf();
    println!(
        "F = P/Q with P = {:?}, Q = {:?}",
        pgf.num().coeffs(),
        pgf.den().coeffs()
    );
    println!("series {:?}", pgf.series(5));

    // a geometric lifetime given directly by its generating function
    let geometric = RationalPGF::new(Poly::new(vec![0.0, 0.5]), Poly::new(vec![1.0, -0.5]))?;
    println!(
        "geometric: mean {} variance {}",
        geometric.mean(),
        geometric.variance()
    );

    match LifetimeSpec::constant_hazard(vec![0.0, 1.0], 0.0) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

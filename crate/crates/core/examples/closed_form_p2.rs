//! Closed-form ARMA(2,1) parameters for a constant hazard after lag 2,
//! compared with the numerical factorization.

use renewal_arma::arma::{closed_form_p2, factorize};
use renewal_arma::lifetime::LifetimeSpec;

pub fn run_example() -> renewal_arma::Result<()> {
    // the last case has f_3 = f_2 r, so the MA part vanishes
    for (f1, f2, r) in [(0.2, 0.3, 0.6), (0.5, 0.1, 0.3), (0.4, 0.3, 0.5)] {
        let cf = closed_form_p2(f1, f2, r);
        let model = factorize(&LifetimeSpec::constant_hazard(vec![f1, f2], r)?.pgf(), 1)?;
        println!("f1 {f1} f2 {f2} r {r}");
        println!(
            "  closed form phi {:?} theta {:?} k {}",
            cf.phi, cf.theta, cf.k
        );
        println!(
            "  numerical   phi {:?} theta {:?} k {}",
            model.phi, model.theta, model.k
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

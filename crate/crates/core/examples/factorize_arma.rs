//! Exact ARMA(p, p-1) representation of a superposition of renewal chains,
//! checked against the renewal-side generating function and autocovariance.

use renewal_arma::arma::{arma_acvf, check_causal_invertible, Factorization};
use renewal_arma::lifetime::LifetimeSpec;
use renewal_arma::polynomials::Tolerances;
use renewal_arma::verify::{acvf_equivalence_error, gen_identity_error};

pub fn run_example() -> renewal_arma::Result<()> {
    let m = 3;
    for (head, r) in [
        (vec![0.5], 0.5),
        (vec![0.3], 0.4),
        (vec![0.2, 0.3], 0.6),
        (vec![0.1, 0.2, 0.1, 0.2], 0.5),
    ] {
        let spec = LifetimeSpec::constant_hazard(head, r)?;
        let fact = Factorization::compute(&spec.pgf(), m, &Tolerances::default())?;
        let model = &fact.model;
        let roots = check_causal_invertible(model);
        let (p, q) = model.order();
        println!("head {:?}, r {r}: ARMA({p},{q})", spec.head());
        println!("  phi {:?}", model.phi);
        println!("  theta {:?}", model.theta);
        println!(
            "  k {} (variance route {}), sigma2 {}",
            fact.k_constant_term, fact.k_theorem, model.sigma2
        );
        println!(
            "  min root modulus {:.4}",
            roots
                .ar_roots
                .iter()
                .chain(&roots.ma_roots)
                .map(|r| r.modulus)
                .fold(f64::INFINITY, f64::min)
        );
        println!("  gamma(0..3) {:?}", arma_acvf(model, 3)?);
        println!(
            "  generating-function gap {:.1e}, autocovariance gap {:.1e}",
            gen_identity_error(&spec.pgf(), model, 64)?,
            acvf_equivalence_error(&spec, model, 50)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

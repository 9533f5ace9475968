//! Polynomial toolkit: roots, deflation at `z = 1`, and the outside-circle
//! factorization of a symmetric Laurent polynomial.

use num_complex::Complex64;
use renewal_arma::polynomials::{Poly, SymLaurent};

pub fn run_example() -> renewal_arma::Result<()> {
    // (z - 2)(z + 3)
    let p = Poly::from_roots(&[Complex64::new(2.0, 0.0), Complex64::new(-3.0, 0.0)]);
    println!("p = {:?}, roots {:?}", p.coeffs(), p.roots()?);

    let q = Poly::new(vec![1.0, -0.8, -0.18, -0.02]);
    println!(
        "(1 - z) divides {:?}: quotient {:?}",
        q.coeffs(),
        q.deflate_at_one()?.coeffs()
    );

    // 2.5 - (z + 1/z) = 2 (1 - z/2)(1 - 1/(2z))
    let n = SymLaurent::new(vec![2.5, -1.0]);
    let (theta, k) = n.factor_outside()?;
    println!(
        "{:?} = {k} * theta(z) theta(1/z) with theta = {:?}",
        n.coeffs(),
        theta.coeffs()
    );

    let lifetime_num = Poly::new(vec![0.0, 0.2, 0.18, 0.02]);
    let lifetime_den = Poly::new(vec![1.0, -0.6]);
    let diff = SymLaurent::product_diff(&lifetime_num, &lifetime_den);
    let reduced = diff.divide_unit_pair()?;
    println!(
        "QQ* - PP* = {:?}, after removing (1-z)(1-1/z): {:?}",
        diff.coeffs(),
        reduced.coeffs()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> renewal_arma::Result<()> {
    run_example()
}

//! ARMA representation of superposed stationary renewal chains.
//!
//! For a nonlattice lifetime with rational generating function `F = P/Q`
//! the count series has autocovariance generating function
//!
//! ```text
//! G(z) = (k M / mu) theta(z) theta(1/z) / (phi(z) phi(1/z))
//! ```
//!
//! where `(1 - z) Q(0) phi(z) = Q(z) - P(z)` and
//! `Q(z)Q(1/z) - P(z)P(1/z) = k Q(0)^2 (1 - z)(1 - 1/z) theta(z) theta(1/z)`.
//! Both polynomials have all zeros outside the unit circle, so the model is
//! causal and invertible. [`factorize`] computes it numerically and checks the
//! normalization constant against `k = sigma_L^2 Q(1)^2 / (theta(1)^2 Q(0)^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::RationalPGF;
use crate::polynomials::{Poly, SymLaurent, Tolerances};

/// Relative agreement demanded between the two routes to `k`.
pub const K_ROUTE_TOL: f64 = 1e-9;

/// ARMA(p, q) model `phi(B) Y_t = theta(B) Z_t`, `Var Z_t = sigma2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmaModel {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub k: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub mu: f64,
    pub sigma2: f64,
}

impl ArmaModel {
    /// Model with `sigma2 = k M / mu`.
    pub fn new(phi: Vec<f64>, theta: Vec<f64>, k: f64, m: u32, mu: f64) -> Self {
        Self {
            phi,
            theta,
            k,
            m,
            mu,
            sigma2: k * m as f64 / mu,
        }
    }

    /// `(p, q)`.
    pub fn order(&self) -> (usize, usize) {
        (self.phi.len(), self.theta.len())
    }

    /// `phi(z) = 1 - phi_1 z - ... - phi_p z^p`.
    pub fn ar_poly(&self) -> Poly {
        let mut c = vec![1.0];
        c.extend(self.phi.iter().map(|v| -v));
        Poly::new(c)
    }

    /// `theta(z) = 1 + theta_1 z + ... + theta_q z^q`.
    pub fn ma_poly(&self) -> Poly {
        let mut c = vec![1.0];
        c.extend(self.theta.iter().copied());
        Poly::new(c)
    }
}

/// Output of [`Factorization::compute`]: the model plus both `k` routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub model: ArmaModel,
    /// `k` from normalizing `theta(0) = 1`.
    pub k_constant_term: f64,
    /// `k` from the lifetime variance.
    pub k_theorem: f64,
    pub lifetime_variance: f64,
}

impl Factorization {
    pub fn compute(pgf: &RationalPGF, m: u32, tol: &Tolerances) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        let (p, q) = (pgf.num(), pgf.den());
        let q0 = q.coeff(0);

        let deflated = q.sub(p).deflate_at_one_with(tol)?;
        let ar = deflated.scale(1.0 / deflated.coeff(0));

        let numerator = SymLaurent::product_diff(p, q);
        let reduced = numerator.divide_unit_pair_with(tol)?;
        let (theta, k_raw) = reduced.factor_outside_with(tol)?;
        let k_constant_term = k_raw / (q0 * q0);

        let lifetime_variance = pgf.variance();
        let k_theorem = theorem_k(
            lifetime_variance,
            q.eval_real(1.0),
            theta.eval_real(1.0),
            q0,
        );
        let gap = (k_constant_term - k_theorem).abs();
        if gap.is_nan() || gap > K_ROUTE_TOL * k_theorem.abs() {
            return Err(Error::KInconsistent {
                k_constant_term,
                k_theorem,
            });
        }

        let phi = ar.coeffs().iter().skip(1).map(|c| -c).collect();
        let theta = theta.coeffs().iter().skip(1).copied().collect();
        Ok(Self {
            model: ArmaModel::new(phi, theta, k_constant_term, m, pgf.mean()),
            k_constant_term,
            k_theorem,
            lifetime_variance,
        })
    }
}

/// `k = sigma_L^2 Q(1)^2 / (theta(1)^2 Q(0)^2)`.
pub fn theorem_k(lifetime_variance: f64, q_at_one: f64, theta_at_one: f64, q0: f64) -> f64 {
    lifetime_variance * q_at_one * q_at_one / (theta_at_one * theta_at_one * q0 * q0)
}

/// Causal, invertible ARMA model of the superposition of `m` renewal chains.
pub fn factorize(pgf: &RationalPGF, m: u32) -> Result<ArmaModel> {
    Factorization::compute(pgf, m, &Tolerances::default()).map(|f| f.model)
}

/// Closed-form ARMA(2, 1) factorization for a constant hazard after lag 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormP2 {
    pub phi: [f64; 2],
    /// Empty when `f_3 = f_2 r` and the MA factor collapses.
    pub theta: Vec<f64>,
    pub k: f64,
    pub pi0: f64,
    pub pi1: f64,
}

/// Closed forms for head `(f1, f2)` and tail rate `r`; `f_3 = (1-r)(1-f1-f2)`.
pub fn closed_form_p2(f1: f64, f2: f64, r: f64) -> ClosedFormP2 {
    let f3 = (1.0 - r) * (1.0 - f1 - f2);
    let phi = [r + f1 - 1.0, f2 * r - f3];
    let pi0 = f1 * (f3 - f2 * r);
    let pi1 =
        f1 * f2 * (1.0 - r).powi(2) + f1 * f3 * (2.0 - r) + r * (1.0 - f1 * f1 - f2 * f2) + f2 * f3;
    let c0 = (1.0 - f1 * f1 - f2 * f2 - f3 * f3)
        + r * r * (1.0 - f1 * f1 - f2 * f2)
        + 2.0 * f1 * f2 * r
        + 2.0 * f2 * f3 * r;
    if pi0.abs() <= 1e-13 * pi1.abs() {
        return ClosedFormP2 {
            phi,
            theta: Vec::new(),
            k: c0 / 2.0,
            pi0,
            pi1,
        };
    }
    let a1 = (-pi1 - (pi1 * pi1 - 4.0 * pi0 * pi0).sqrt()) / (2.0 * pi0);
    let theta = -1.0 / a1;
    ClosedFormP2 {
        phi,
        theta: vec![theta],
        k: c0 / (2.0 + 2.0 * theta * theta - 2.0 * theta),
        pi0,
        pi1,
    }
}

/// Largest reciprocal modulus among the roots of `phi`; zero for an empty AR part.
pub fn ar_spectral_radius(model: &ArmaModel) -> Result<f64> {
    let ar = model.ar_poly();
    if ar.degree().unwrap_or(0) == 0 {
        return Ok(0.0);
    }
    Ok(ar
        .roots()?
        .iter()
        .fold(0.0, |m: f64, r| m.max(1.0 / r.norm())))
}

/// MA(infinity) weights `psi_0..psi_{n-1}` of `theta(z)/phi(z)`.
pub fn psi_weights(model: &ArmaModel, n: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = if j == 0 {
            1.0
        } else {
            model.theta.get(j - 1).copied().unwrap_or(0.0)
        };
        for (i, phi) in model.phi.iter().enumerate() {
            if j > i {
                v += phi * psi[j - i - 1];
            }
        }
        psi.push(v);
    }
    psi
}

/// Model autocovariance `gamma(0..=hmax)` from the truncated MA(infinity) form.
pub fn arma_acvf(model: &ArmaModel, hmax: usize) -> Result<Vec<f64>> {
    let rho = ar_spectral_radius(model)?;
    if rho > 1.0 - 1e-6 {
        return Err(Error::NonCausal { rho });
    }
    // tail bound rho^T / (1 - rho) < 1e-14, padded for root multiplicity
    let terms = if rho == 0.0 {
        model.theta.len() + 1
    } else {
        let t = ((1e-14 * (1.0 - rho)).ln() / rho.ln()).ceil() as usize;
        t + t / 2 + 64 + model.theta.len()
    };
    let psi = psi_weights(model, terms + hmax + 1);
    Ok((0..=hmax)
        .map(|h| {
            model.sigma2
                * psi[..=terms]
                    .iter()
                    .zip(&psi[h..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
        .collect())
}

/// `sigma2 theta(z) theta(1/z) / (phi(z) phi(1/z))`.
pub fn gen_eval_arma(model: &ArmaModel, z: Complex64) -> Result<Complex64> {
    if z.norm() < 1e-14 || !z.is_finite() {
        return Err(Error::SingularEvaluation);
    }
    let zi = z.inv();
    let (ar, ma) = (model.ar_poly(), model.ma_poly());
    let den = ar.eval(z) * ar.eval(zi);
    if den.norm() < 1e-14 {
        return Err(Error::SingularEvaluation);
    }
    Ok(ma.eval(z) * ma.eval(zi) / den * model.sigma2)
}

/// A polynomial root and its modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootInfo {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

impl From<Complex64> for RootInfo {
    fn from(z: Complex64) -> Self {
        Self {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        }
    }
}

/// Root moduli of `phi` and `theta` with the causality/invertibility verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub ar_roots: Vec<RootInfo>,
    pub ma_roots: Vec<RootInfo>,
    pub causal: bool,
    pub invertible: bool,
    /// Smallest distance between an AR root and an MA root.
    pub min_common_root_distance: Option<f64>,
    pub passes: bool,
}

fn poly_roots(p: &Poly) -> Result<Vec<Complex64>> {
    if p.degree().unwrap_or(0) == 0 {
        Ok(Vec::new())
    } else {
        p.roots()
    }
}

/// Lists every AR and MA root; passes iff all moduli exceed `1 + tol.circle`
/// and no AR root coincides with an MA root.
pub fn check_causal_invertible(model: &ArmaModel) -> RootReport {
    check_causal_invertible_with(model, &Tolerances::default())
}

pub fn check_causal_invertible_with(model: &ArmaModel, tol: &Tolerances) -> RootReport {
    let ar = poly_roots(&model.ar_poly());
    let ma = poly_roots(&model.ma_poly());
    let bound = 1.0 + tol.circle;
    let outside = |roots: &Result<Vec<Complex64>>| match roots {
        Ok(r) => r.iter().all(|z| z.norm() > bound),
        Err(_) => false,
    };
    let (causal, invertible) = (outside(&ar), outside(&ma));
    let ar = ar.unwrap_or_default();
    let ma = ma.unwrap_or_default();
    let min_common_root_distance = ar
        .iter()
        .flat_map(|a| ma.iter().map(move |b| (a - b).norm()))
        .min_by(|x, y| x.total_cmp(y));
    let distinct = min_common_root_distance.is_none_or(|d| d > tol.circle);
    RootReport {
        ar_roots: ar.into_iter().map(RootInfo::from).collect(),
        ma_roots: ma.into_iter().map(RootInfo::from).collect(),
        causal,
        invertible,
        min_common_root_distance,
        passes: causal && invertible && distinct,
    }
}

/// `(F(z)F(1/z) - 1) z / (z - 1)^2` at `z = 1 + eps`, which tends to the
/// lifetime variance as `eps -> 0`.
pub fn reflected_product_ratio(pgf: &RationalPGF, eps: f64) -> f64 {
    let z = 1.0 + eps;
    let f = |x: f64| pgf.num().eval_real(x) / pgf.den().eval_real(x);
    let prod = f(z) * f(1.0 / z);
    (1.0 - prod) / ((1.0 - z) * (1.0 - 1.0 / z))
}

/// Richardson extrapolation of [`reflected_product_ratio`] from
/// `eps = 1e-3` and `1e-4`. The ratio is even in `log z`, so the leading
/// error is quadratic in `eps`.
pub fn variance_limit(pgf: &RationalPGF) -> f64 {
    let (e1, e2) = (1e-3, 1e-4);
    let (r1, r2) = (
        reflected_product_ratio(pgf, e1),
        reflected_product_ratio(pgf, e2),
    );
    let w = (e1 / e2) * (e1 / e2);
    (w * r2 - r1) / (w - 1.0)
}

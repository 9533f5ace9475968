//! Renewal probabilities and the autocovariance of superposed renewal chains.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::{LifetimeSpec, RationalPGF};

/// Default horizon for renewal tables.
pub const DEFAULT_HORIZON: usize = 512;

/// Pure and equilibrium-delayed renewal probabilities up to a horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalTable {
    pub u: Vec<f64>,
    pub nu: Vec<f64>,
    pub mu: f64,
    pub horizon: usize,
}

impl RenewalTable {
    pub fn compute(spec: &LifetimeSpec, horizon: usize) -> Self {
        let u = renewal_probs(spec, horizon);
        let b: Vec<f64> = (0..=horizon).map(|n| spec.equilibrium_pmf(n)).collect();
        Self {
            nu: convolve_prefix(&b, &u),
            u,
            mu: spec.mean(),
            horizon,
        }
    }

    /// `max_n |nu_n - 1/mu|`.
    pub fn stationarity_error(&self) -> f64 {
        let target = 1.0 / self.mu;
        self.nu
            .iter()
            .fold(0.0, |m: f64, v| m.max((v - target).abs()))
    }
}

/// Solve `u_0 = 1`, `u_n = sum_{j<n} u_j f_{n-j}` given `f_1..f_N`.
pub fn renewal_from_pmf(f: &[f64], horizon: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(horizon + 1);
    u.push(1.0);
    for n in 1..=horizon {
        let v: f64 = (0..n)
            .filter(|j| n - j <= f.len())
            .map(|j| u[j] * f[n - j - 1])
            .sum();
        u.push(v);
    }
    u
}

/// Renewal probabilities `u_0..u_N` of the pure process (O(N^2) convolution).
pub fn renewal_probs(spec: &LifetimeSpec, horizon: usize) -> Vec<f64> {
    renewal_from_pmf(&spec.pmf_table(horizon), horizon)
}

/// Renewal probabilities from a rational PGF via `(Q - P) U = Q`.
///
/// Linear in the horizon; agrees with [`renewal_probs`] to rounding.
pub fn renewal_probs_rational(pgf: &RationalPGF, horizon: usize) -> Vec<f64> {
    let d = pgf.den().sub(pgf.num());
    let dc = d.coeffs();
    let mut u: Vec<f64> = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let mut v = pgf.den().coeff(n);
        for j in 1..dc.len().min(n + 1) {
            v -= dc[j] * u[n - j];
        }
        u.push(v / dc[0]);
    }
    u
}

/// `c_n = sum_{k<=n} a_k b_{n-k}` for `n` up to the shorter length.
fn convolve_prefix(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|i| (0..=i).map(|k| a[k] * b[i - k]).sum())
        .collect()
}

/// Renewal probabilities `nu_0..nu_N` with the equilibrium delay.
pub fn delayed_probs(spec: &LifetimeSpec, horizon: usize) -> Vec<f64> {
    let u = renewal_probs(spec, horizon);
    let b: Vec<f64> = (0..=horizon).map(|n| spec.equilibrium_pmf(n)).collect();
    convolve_prefix(&b, &u)
}

/// `gamma(h) = (M/mu)(u_h - 1/mu)` for `h = 0..=hmax`.
pub fn acvf_from_renewal(u: &[f64], m: u32, mu: f64) -> Vec<f64> {
    let scale = m as f64 / mu;
    u.iter().map(|uh| scale * (uh - 1.0 / mu)).collect()
}

/// Autocovariance of the superposition of `m` stationary renewal chains.
pub fn acvf_renewal(spec: &LifetimeSpec, m: u32, hmax: usize) -> Vec<f64> {
    acvf_from_renewal(&renewal_probs(spec, hmax), m, spec.mean())
}

/// Same as [`acvf_renewal`] for a lifetime given only by its PGF.
pub fn acvf_renewal_pgf(pgf: &RationalPGF, m: u32, hmax: usize) -> Vec<f64> {
    acvf_from_renewal(&renewal_probs_rational(pgf, hmax), m, pgf.mean())
}

/// Autocovariance generating function from the lifetime PGF:
///
/// ```text
/// G(z) = (M/mu) (1 - F(z)F(1/z)) / ((1 - F(z))(1 - F(1/z)))
/// ```
///
/// `z = 1` is a removable singularity and is rejected.
pub fn gen_eval_renewal(pgf: &RationalPGF, m: u32, mu: f64, z: Complex64) -> Result<Complex64> {
    let singular = |w: Complex64| w.norm() < 1e-14 || !w.is_finite();
    if singular(z) || (z - 1.0).norm() < 1e-12 {
        return Err(Error::SingularEvaluation);
    }
    let zi = z.inv();
    let (qz, qzi) = (pgf.den().eval(z), pgf.den().eval(zi));
    if singular(qz) || singular(qzi) {
        return Err(Error::SingularEvaluation);
    }
    let (fz, fzi) = (pgf.num().eval(z) / qz, pgf.num().eval(zi) / qzi);
    let denom = (1.0 - fz) * (1.0 - fzi);
    if singular(denom) {
        return Err(Error::SingularEvaluation);
    }
    Ok((1.0 - fz * fzi) / denom * (m as f64 / mu))
}

/// Truncated two-sided series `sum_{|h|<=H} gamma(h) z^h`.
pub fn acvf_series(gamma: &[f64], z: Complex64) -> Complex64 {
    let zi = z.inv();
    let mut acc = Complex64::new(gamma.first().copied().unwrap_or(0.0), 0.0);
    let (mut zp, mut zn) = (z, zi);
    for &g in gamma.iter().skip(1) {
        acc += (zp + zn) * g;
        zp *= z;
        zn *= zi;
    }
    acc
}

/// Smallest horizon with `|gamma(H)|` below `eps` (capped at `cap`).
pub fn adaptive_horizon(spec: &LifetimeSpec, m: u32, eps: f64, cap: usize) -> usize {
    let u = renewal_probs_rational(&spec.pgf(), cap);
    let g = acvf_from_renewal(&u, m, spec.mean());
    // require a short run of small values to skip accidental zero crossings
    let run = 8;
    (0..g.len())
        .find(|&h| g[h..(h + run).min(g.len())].iter().all(|v| v.abs() < eps))
        .unwrap_or(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn geometric() -> LifetimeSpec {
        LifetimeSpec::constant_hazard(vec![0.5], 0.5).unwrap()
    }

    fn running() -> LifetimeSpec {
        LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6).unwrap()
    }

    #[test]
    fn renewal_examples() {
        let u = renewal_probs(&geometric(), 20);
        assert_eq!(u[0], 1.0);
        for v in &u[1..] {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
        let u = renewal_probs(&running(), 50);
        assert_abs_diff_eq!(u[1], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(u[2], 0.34, epsilon = 1e-15);
        assert_abs_diff_eq!(u[50], 1.0 / 3.05, epsilon = 1e-8);
    }

    #[test]
    fn rational_recursion_matches_reference() {
        for spec in [
            geometric(),
            running(),
            LifetimeSpec::constant_hazard(vec![0.1, 0.2, 0.1, 0.2], 0.5).unwrap(),
            LifetimeSpec::constant_hazard(vec![0.4, 0.6], 0.0).unwrap(),
        ] {
            let a = renewal_probs(&spec, 300);
            let b = renewal_probs_rational(&spec.pgf(), 300);
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn delayed_is_stationary() {
        let nu = delayed_probs(&geometric(), 50);
        assert!(nu.iter().all(|v| (v - 0.5).abs() < 1e-15));
        let t = RenewalTable::compute(&running(), 200);
        assert!(t.stationarity_error() < 1e-12);
        assert_eq!(t.nu[0], running().equilibrium_pmf(0));
        assert_abs_diff_eq!(t.nu[0], 1.0 / 3.05, epsilon = 1e-15);
    }

    #[test]
    fn acvf_examples() {
        let g = acvf_renewal(&geometric(), 4, 10);
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-15);
        assert!(g[1..].iter().all(|v| v.abs() < 1e-15));

        let g = acvf_renewal(&running(), 5, 5);
        let mu = 3.05;
        assert_abs_diff_eq!(g[1], (5.0 / mu) * (0.2 - 1.0 / mu), epsilon = 1e-15);
        assert!(g[1] < 0.0);
        assert_abs_diff_eq!(g[0], (5.0 / mu) * (1.0 - 1.0 / mu), epsilon = 1e-15);
        assert_abs_diff_eq!(g[0], 1.1019, epsilon = 1e-4);
    }

    #[test]
    fn generating_function_white_noise() {
        let z = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let g = gen_eval_renewal(&geometric().pgf(), 4, 2.0, z).unwrap();
        assert_abs_diff_eq!(g.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn generating_function_matches_series() {
        let spec = running();
        let z = Complex64::from_polar(1.0, std::f64::consts::PI / 4.0);
        let g = gen_eval_renewal(&spec.pgf(), 5, spec.mean(), z).unwrap();
        let series = acvf_series(&acvf_renewal(&spec, 5, 200), z);
        assert!((g - series).norm() < 1e-8);
        assert!(g.re > 0.0 && g.im.abs() < 1e-12);
    }

    #[test]
    fn generating_function_singular_points() {
        let pgf = running().pgf();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] {
            assert_eq!(
                gen_eval_renewal(&pgf, 5, 3.05, z),
                Err(Error::SingularEvaluation)
            );
        }
        // pole of Q(z) = 1 - 0.6 z
        assert!(gen_eval_renewal(&pgf, 5, 3.05, Complex64::new(1.0 / 0.6, 0.0)).is_err());
    }

    #[test]
    fn horizon_is_adaptive() {
        let h = adaptive_horizon(&running(), 5, 1e-12, 2000);
        let g = acvf_renewal(&running(), 5, h + 20);
        assert!(g[h..].iter().all(|v| v.abs() < 1e-12));
        assert!(h < 200);
    }
}

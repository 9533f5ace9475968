//! Integer lifetime distributions with a constant hazard after lag `p`.
//!
//! A [`LifetimeSpec`] holds the head probabilities `f_1..f_p` and a tail rate
//! `r`. The remaining mass sits on a geometric tail,
//! `P(L = n) = f_{p+1} r^{n-p-1}` for `n >= p+1`, where
//! `f_{p+1} = (1 - r)(1 - sum f_i)` follows from normalization. With `r = 0`
//! the lifetime has finite support `{1, .., p+1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomials::Poly;

/// Slack allowed when the head probabilities sum to one.
const MASS_TOL: f64 = 1e-12;

/// Number of power-series terms checked when validating a PGF.
const SERIES_CHECK_TERMS: usize = 200;

/// Validation switches for [`LifetimeSpec`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifetimeOptions {
    /// Accept `f_1 = 0`; the support must still have gcd one.
    #[serde(default)]
    pub allow_zero_f1: bool,
}

#[derive(Deserialize)]
struct RawSpec {
    head: Vec<f64>,
    r: f64,
    #[serde(default)]
    allow_zero_f1: bool,
}

/// Lifetime law with finite head and geometric tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct LifetimeSpec {
    head: Vec<f64>,
    r: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    allow_zero_f1: bool,
    #[serde(skip)]
    tail_mass: f64,
}

impl TryFrom<RawSpec> for LifetimeSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        LifetimeSpec::with_options(
            raw.head,
            raw.r,
            LifetimeOptions {
                allow_zero_f1: raw.allow_zero_f1,
            },
        )
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl LifetimeSpec {
    /// Validated spec with the default options (`0 < f_1 < 1` enforced).
    pub fn constant_hazard(head: Vec<f64>, r: f64) -> Result<Self> {
        Self::with_options(head, r, LifetimeOptions::default())
    }

    pub fn with_options(head: Vec<f64>, r: f64, opts: LifetimeOptions) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::InvalidSpec("head must contain at least f_1".into()));
        }
        if let Some((i, f)) = head
            .iter()
            .enumerate()
            .find(|(_, f)| !f.is_finite() || **f < 0.0 || **f > 1.0)
        {
            return Err(Error::InvalidSpec(format!(
                "f_{} = {f} is not a probability",
                i + 1
            )));
        }
        if !r.is_finite() || !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidSpec(format!(
                "tail rate r = {r} must lie in [0, 1)"
            )));
        }
        let head_sum: f64 = head.iter().sum();
        if head_sum > 1.0 + MASS_TOL {
            return Err(Error::InvalidSpec(format!(
                "head probabilities sum to {head_sum} > 1"
            )));
        }
        let tail_mass = (1.0 - head_sum).max(0.0);
        if r > 0.0 && tail_mass <= 0.0 {
            return Err(Error::InvalidSpec(
                "a geometric tail (r > 0) needs positive tail mass".into(),
            ));
        }
        let f1 = head[0];
        if !opts.allow_zero_f1 && !(f1 > 0.0 && f1 < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "f_1 = {f1} must satisfy 0 < f_1 < 1"
            )));
        }
        let spec = Self {
            head,
            r,
            allow_zero_f1: opts.allow_zero_f1,
            tail_mass,
        };
        let g = spec.support_gcd();
        if g != 1 {
            return Err(Error::Lattice { gcd: g });
        }
        Ok(spec)
    }

    /// Number of head probabilities.
    pub fn p(&self) -> usize {
        self.head.len()
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// Geometric tail rate `r`.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn options(&self) -> LifetimeOptions {
        LifetimeOptions {
            allow_zero_f1: self.allow_zero_f1,
        }
    }

    /// Probability `P(L > p)` carried by the tail.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `f_{p+1}`, the first tail probability.
    pub fn tail_prob(&self) -> f64 {
        (1.0 - self.r) * self.tail_mass
    }

    pub fn is_finite_support(&self) -> bool {
        self.r == 0.0
    }

    /// gcd of the support; one for a nonlattice law.
    pub fn support_gcd(&self) -> u64 {
        let p = self.p() as u64;
        let mut support: Vec<u64> = self
            .head
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > 0.0)
            .map(|(i, _)| i as u64 + 1)
            .collect();
        if self.tail_prob() > 0.0 {
            support.push(p + 1);
            if self.r > 0.0 {
                support.push(p + 2);
            }
        }
        support.into_iter().fold(0, gcd)
    }

    /// `P(L = n)` for `n >= 1`.
    pub fn pmf(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("pmf index must be >= 1".into()));
        }
        Ok(self.pmf_unchecked(n))
    }

    pub(crate) fn pmf_unchecked(&self, n: usize) -> f64 {
        let p = self.p();
        if n <= p {
            self.head[n - 1]
        } else {
            self.tail_prob() * self.r.powi((n - p - 1) as i32)
        }
    }

    /// Probabilities `f_1..f_n`.
    pub fn pmf_table(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.pmf_unchecked(i)).collect()
    }

    /// Survival function `P(L > n)` in closed form.
    pub fn survival(&self, n: usize) -> f64 {
        let p = self.p();
        if n >= p {
            self.tail_mass * self.r.powi((n - p) as i32)
        } else {
            (1.0 - self.head[..n].iter().sum::<f64>()).max(0.0)
        }
    }

    /// Hazard `P(L = k | L >= k)`.
    pub fn hazard(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("hazard index must be >= 1".into()));
        }
        let surv = self.survival(k - 1);
        if surv <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "hazard at k = {k} undefined: P(L >= k) = 0"
            )));
        }
        if k > self.p() {
            // f_k / P(L >= k) collapses to the tail hazard
            return Ok(1.0 - self.r);
        }
        Ok(self.head[k - 1] / surv)
    }

    /// Mean lifetime `mu`.
    pub fn mean(&self) -> f64 {
        let p = self.p() as f64;
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(i, f)| (i + 1) as f64 * f)
            .sum();
        let r = self.r;
        head + self.tail_prob() * ((p + 1.0) - p * r) / ((1.0 - r) * (1.0 - r))
    }

    /// `E[L(L-1)]`.
    pub fn second_factorial_moment(&self) -> f64 {
        let r = self.r;
        let m = self.p() as f64 + 1.0;
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let n = (i + 1) as f64;
                n * (n - 1.0) * f
            })
            .sum();
        let s0 = 1.0 / (1.0 - r);
        let s1 = r / ((1.0 - r) * (1.0 - r));
        let s2 = r * (1.0 + r) / ((1.0 - r).powi(3));
        head + self.tail_prob() * (m * (m - 1.0) * s0 + (2.0 * m - 1.0) * s1 + s2)
    }

    /// Lifetime variance `sigma_L^2`.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.second_factorial_moment() + mu - mu * mu
    }

    /// Equilibrium delay law `b_n = P(L > n) / mu`.
    pub fn equilibrium_pmf(&self, n: usize) -> f64 {
        self.survival(n) / self.mean()
    }

    /// Rational generating function `F(z) = P(z)/Q(z)` with `Q = 1 - r z`.
    pub fn pgf(&self) -> RationalPGF {
        let p = self.p();
        let r = self.r;
        let mut num = vec![0.0; p + 2];
        num[1] = self.head[0];
        for (slot, pair) in num[2..=p].iter_mut().zip(self.head.windows(2)) {
            *slot = pair[1] - pair[0] * r;
        }
        num[p + 1] = self.tail_prob() - self.head[p - 1] * r;
        RationalPGF {
            num: Poly::new(num),
            den: Poly::new(vec![1.0, -r]),
        }
    }
}

/// Lifetime generating function `F(z) = P(z)/Q(z)` in lowest terms, `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalPGF {
    num: Poly,
    den: Poly,
}

impl RationalPGF {
    /// Validated PGF. `den` is rescaled so that `Q(0) = 1`.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        let q0 = den.coeff(0);
        if q0 == 0.0 || !q0.is_finite() {
            return Err(Error::InvalidSpec("denominator must have Q(0) != 0".into()));
        }
        if num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .any(|c| !c.is_finite())
        {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        let num = num.scale(1.0 / q0);
        let den = den.scale(1.0 / q0);
        if num.is_zero() {
            return Err(Error::InvalidSpec("numerator is zero".into()));
        }
        if num.coeff(0).abs() > 1e-14 {
            return Err(Error::InvalidSpec(format!(
                "P(0) = {} but a lifetime has no mass at zero",
                num.coeff(0)
            )));
        }
        let mut coeffs = num.coeffs().to_vec();
        coeffs[0] = 0.0;
        let num = Poly::new(coeffs);
        let (p1, q1) = (num.eval_real(1.0), den.eval_real(1.0));
        if (p1 - q1).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "F(1) = {} differs from 1",
                p1 / q1
            )));
        }
        let res = resultant(&num.scale(1.0 / num.norm()), &den.scale(1.0 / den.norm()));
        if res.is_nan() || res.abs() <= 1e-10 {
            return Err(Error::InvalidSpec(format!(
                "P and Q share a factor (normalized resultant {res:e})"
            )));
        }
        let pgf = Self { num, den };
        let series = pgf.series(SERIES_CHECK_TERMS);
        let max = series.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if let Some((n, c)) = series
            .iter()
            .enumerate()
            .find(|(_, c)| **c < -1e-12 * max.max(1.0))
        {
            return Err(Error::InvalidSpec(format!(
                "power-series coefficient f_{n} = {c} is negative"
            )));
        }
        let g = series
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 1e-12 * max)
            .fold(0, |g, (n, _)| gcd(g, n as u64));
        if g != 1 {
            return Err(Error::Lattice { gcd: g });
        }
        Ok(pgf)
    }

    /// `P(z)`.
    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// `Q(z)`.
    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }

    /// Power-series coefficients `f_0..f_{n-1}` of `P/Q` by long division.
    pub fn series(&self, n: usize) -> Vec<f64> {
        let q = self.den.coeffs();
        let mut out: Vec<f64> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = self.num.coeff(i);
            for j in 1..q.len().min(i + 1) {
                v -= q[j] * out[i - j];
            }
            out.push(v / q[0]);
        }
        out
    }

    fn derivatives_at_one(&self) -> (f64, f64) {
        let (p, q) = (&self.num, &self.den);
        let (dp, dq) = (p.derivative(), q.derivative());
        let (ddp, ddq) = (dp.derivative(), dq.derivative());
        let (p0, q0) = (p.eval_real(1.0), q.eval_real(1.0));
        let (p1, q1) = (dp.eval_real(1.0), dq.eval_real(1.0));
        let (p2, q2) = (ddp.eval_real(1.0), ddq.eval_real(1.0));
        let first = (p1 * q0 - p0 * q1) / (q0 * q0);
        let second = ((p2 * q0 - p0 * q2) * q0 - 2.0 * q1 * (p1 * q0 - p0 * q1)) / q0.powi(3);
        (first, second)
    }

    /// `F'(1)`, the mean lifetime.
    pub fn mean(&self) -> f64 {
        self.derivatives_at_one().0
    }

    /// `F''(1) + F'(1) - F'(1)^2`, the lifetime variance.
    pub fn variance(&self) -> f64 {
        let (a, b2) = self.derivatives_at_one();
        b2 + a - a * a
    }
}

/// Resultant via the Sylvester determinant.
pub fn resultant(p: &Poly, q: &Poly) -> f64 {
    let (Some(m), Some(n)) = (p.degree(), q.degree()) else {
        return 0.0;
    };
    if m == 0 {
        return p.coeff(0).powi(n as i32);
    }
    if n == 0 {
        return q.coeff(0).powi(m as i32);
    }
    let size = m + n;
    let mut s = nalgebra::DMatrix::<f64>::zeros(size, size);
    // rows hold descending coefficients, shifted
    for row in 0..n {
        for (k, c) in p.coeffs().iter().rev().enumerate() {
            s[(row, row + k)] = *c;
        }
    }
    for row in 0..m {
        for (k, c) in q.coeffs().iter().rev().enumerate() {
            s[(n + row, row + k)] = *c;
        }
    }
    s.determinant()
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

    /// Moments by direct summation until the tail is negligible.
    fn series_moments(spec: &LifetimeSpec) -> (f64, f64) {
        let (mut m1, mut m2) = (0.0, 0.0);
        let mut n = 1;
        loop {
            let f = spec.pmf(n).unwrap();
            m1 += n as f64 * f;
            m2 += (n * n) as f64 * f;
            if n > spec.p() + 1 && spec.survival(n) * (n * n) as f64 <= 1e-14 * m2 {
                break;
            }
            n += 1;
        }
        (m1, m2 - m1 * m1)
    }

    #[test]
    fn construction_examples() {
        let g = geometric();
        assert_abs_diff_eq!(g.pmf(2).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(g.r(), 0.5);

        let s = running();
        assert_abs_diff_eq!(s.tail_prob(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.pmf(5).unwrap(), 0.072, epsilon = 1e-15);
        assert_eq!(s.pmf(2).unwrap(), 0.3);
        assert_abs_diff_eq!(g.pmf(3).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            LifetimeSpec::constant_hazard(vec![1.1], 0.5),
            Err(Error::InvalidSpec(_))
        ));
        assert!(LifetimeSpec::constant_hazard(vec![-0.1, 0.5], 0.5).is_err());
        assert!(LifetimeSpec::constant_hazard(vec![0.5, 0.6], 0.0).is_err());
        assert!(LifetimeSpec::constant_hazard(vec![0.5, 0.5], 0.3).is_err());
        assert!(LifetimeSpec::constant_hazard(vec![0.5], 1.0).is_err());
        assert!(LifetimeSpec::constant_hazard(vec![], 0.5).is_err());
        // f_1 = 0 needs the opt-out
        assert!(LifetimeSpec::constant_hazard(vec![0.0, 0.5], 0.5).is_err());
        let relaxed = LifetimeOptions {
            allow_zero_f1: true,
        };
        assert!(LifetimeSpec::with_options(vec![0.0, 0.5], 0.5, relaxed).is_ok());
    }

    #[test]
    fn lattice_support_rejected() {
        let relaxed = LifetimeOptions {
            allow_zero_f1: true,
        };
        assert_eq!(
            LifetimeSpec::with_options(vec![0.0, 1.0], 0.0, relaxed),
            Err(Error::Lattice { gcd: 2 })
        );
        assert_eq!(
            LifetimeSpec::with_options(vec![0.0, 0.5, 0.0], 0.0, relaxed),
            Err(Error::Lattice { gcd: 2 })
        );
        // {1, 2} is fine even with no tail
        let s = LifetimeSpec::constant_hazard(vec![0.4, 0.6], 0.0).unwrap();
        assert_eq!(s.tail_prob(), 0.0);
        assert_eq!(s.support_gcd(), 1);
    }

    #[test]
    fn moments() {
        let g = geometric();
        assert_abs_diff_eq!(g.mean(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.variance(), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(running().mean(), 3.05, epsilon = 1e-14);
        let two_point = LifetimeSpec::constant_hazard(vec![0.9], 0.0).unwrap();
        assert_abs_diff_eq!(two_point.mean(), 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(two_point.variance(), 0.09, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_moments_match_series() {
        for spec in [
            geometric(),
            running(),
            LifetimeSpec::constant_hazard(vec![0.1, 0.2, 0.1, 0.2], 0.5).unwrap(),
            LifetimeSpec::constant_hazard(vec![0.05, 0.0, 0.3], 0.9).unwrap(),
        ] {
            let (m, v) = series_moments(&spec);
            assert_abs_diff_eq!(spec.mean(), m, epsilon = 1e-11 * m);
            assert_abs_diff_eq!(spec.variance(), v, epsilon = 1e-10 * v);
        }
    }

    #[test]
    fn moments_match_pgf_derivatives() {
        for spec in [geometric(), running()] {
            let pgf = spec.pgf();
            assert_abs_diff_eq!(pgf.mean(), spec.mean(), epsilon = 1e-10);
            assert_abs_diff_eq!(pgf.variance(), spec.variance(), epsilon = 1e-10);
        }
    }

    #[test]
    fn hazards() {
        let s = running();
        assert_eq!(s.hazard(7).unwrap(), 1.0 - 0.6);
        assert_abs_diff_eq!(s.hazard(1).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(geometric().hazard(1).unwrap(), 0.5);
        for k in 3..=22 {
            assert_abs_diff_eq!(s.hazard(k).unwrap(), 0.4, epsilon = 1e-14);
        }
        let finite = LifetimeSpec::constant_hazard(vec![0.4, 0.6], 0.0).unwrap();
        assert!(finite.hazard(3).is_err());
        assert!(s.hazard(0).is_err());
    }

    #[test]
    fn pgf_coefficients() {
        let g = geometric().pgf();
        assert_eq!(g.num().coeffs(), &[0.0, 0.5]);
        assert_eq!(g.den().coeffs(), &[1.0, -0.5]);

        let s = running().pgf();
        let expect = [0.0, 0.2, 0.18, 0.02];
        for (a, b) in s.num().coeffs().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(s.den().coeffs(), &[1.0, -0.6]);

        let f = LifetimeSpec::constant_hazard(vec![0.9], 0.0).unwrap().pgf();
        assert_abs_diff_eq!(f.num().coeff(1), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(f.num().coeff(2), 0.1, epsilon = 1e-15);
        assert_eq!(f.den().coeffs(), &[1.0]);
    }

    #[test]
    fn pgf_series_reproduces_pmf() {
        let spec = LifetimeSpec::constant_hazard(vec![0.1, 0.2, 0.1, 0.2], 0.5).unwrap();
        let series = spec.pgf().series(200);
        assert_eq!(series[0], 0.0);
        for (n, v) in series.iter().enumerate().skip(1) {
            assert_abs_diff_eq!(*v, spec.pmf(n).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn pmf_sums_to_one_with_tail() {
        let s = running();
        let n = 100;
        let sum: f64 = (1..=n).map(|i| s.pmf(i).unwrap()).sum();
        let remainder = s.tail_prob() * s.r().powi((n - s.p()) as i32) / (1.0 - s.r());
        assert_abs_diff_eq!(sum + remainder, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn equilibrium_law() {
        let g = geometric();
        assert_abs_diff_eq!(g.equilibrium_pmf(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.equilibrium_pmf(2), 0.125, epsilon = 1e-15);

        let s = running();
        // head b_0..b_{p-1}, geometric from p on
        let head: f64 = (0..s.p()).map(|n| s.equilibrium_pmf(n)).sum();
        let tail = s.equilibrium_pmf(s.p()) / (1.0 - s.r());
        assert_abs_diff_eq!(head + tail, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.equilibrium_pmf(0), 1.0 / s.mean(), epsilon = 1e-15);
    }

    #[test]
    fn pgf_validation() {
        // lattice: F(z) = z^2
        let err = RationalPGF::new(Poly::new(vec![0.0, 0.0, 1.0]), Poly::one()).unwrap_err();
        assert_eq!(err, Error::Lattice { gcd: 2 });
        // common factor (1 - 0.5z)
        let p = Poly::new(vec![0.0, 0.5]).mul(&Poly::new(vec![1.0, -0.5]));
        let q = Poly::new(vec![1.0, -0.5]).mul(&Poly::new(vec![1.0, -0.5]));
        assert!(RationalPGF::new(p, q).is_err());
        // F(1) != 1
        assert!(RationalPGF::new(Poly::new(vec![0.0, 0.4]), Poly::one()).is_err());
        // mass at zero
        assert!(RationalPGF::new(Poly::new(vec![0.5, 0.5]), Poly::one()).is_err());
        // rescaling the denominator
        let pgf = RationalPGF::new(Poly::new(vec![0.0, 1.0]), Poly::new(vec![2.0, -1.0])).unwrap();
        assert_eq!(pgf.den().coeffs(), &[1.0, -0.5]);
        assert_eq!(pgf.num().coeffs(), &[0.0, 0.5]);
    }

    #[test]
    fn serde_round_trip() {
        let s: LifetimeSpec = serde_json::from_str(r#"{"head":[0.2,0.3],"r":0.6}"#).unwrap();
        assert_eq!(s, running());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"head":[0.2,0.3],"r":0.6}"#);
        assert!(serde_json::from_str::<LifetimeSpec>(r#"{"head":[1.2],"r":0.6}"#).is_err());
    }
}

//! Real polynomials and symmetric Laurent polynomials.
//!
//! [`Poly`] stores coefficients in ascending power order, so `coeffs()[0]` is
//! the constant term. [`SymLaurent`] stores the one-sided coefficients of
//!
//! ```text
//! N(z) = c_0 + sum_{h=1..d} c_h (z^h + z^-h)
//! ```
//!
//! which is real on the unit circle. The spectral factorization
//! `N(z) = k * theta(z) * theta(1/z)` with all zeros of `theta` outside the
//! unit circle is [`SymLaurent::factor_outside`].

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which trailing coefficients are dropped.
const TRIM_REL: f64 = 1e-13;

/// Grid resolution used for the positivity check on the unit circle.
const POSITIVITY_GRID: usize = 256;

/// Numerical tolerances shared by the polynomial routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `|p(1)|` must be below `zero_at_one * sum|coeffs|` to count as a root at one.
    pub zero_at_one: f64,
    /// Roots with `||a| - 1| < circle` are treated as lying on the unit circle.
    pub circle: f64,
    /// Relative residual bound accepted from the root finder.
    pub resid: f64,
    /// Largest accepted `|a*b - 1|` when pairing reciprocal roots.
    pub pairing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_at_one: 1e-10,
            circle: 1e-8,
            resid: 1e-10,
            pairing: 1e-6,
        }
    }
}

fn trim(mut coeffs: Vec<f64>) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        coeffs.clear();
        return coeffs;
    }
    while let Some(&last) = coeffs.last() {
        if last.abs() < TRIM_REL * max {
            coeffs.pop();
        } else {
            break;
        }
    }
    coeffs
}

/// Real-coefficient polynomial, ascending powers, trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Poly {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}

impl From<Poly> for Vec<f64> {
    fn from(p: Poly) -> Self {
        p.coeffs
    }
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs: trim(coeffs),
        }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `z^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Monic polynomial `prod (z - r)` with the imaginary residue dropped.
    ///
    /// The root set should be closed under conjugation.
    pub fn from_roots(roots: &[Complex64]) -> Poly {
        let c = expand_monic(roots);
        Poly::new(c.iter().map(|z| z.re).collect())
    }

    /// All complex roots, using the default tolerances.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        self.roots_with(&Tolerances::default())
    }

    /// All complex roots with multiplicity.
    ///
    /// Eigenvalues of the balanced companion matrix, polished by two Newton
    /// steps each; conjugate pairs are returned exactly conjugate.
    pub fn roots_with(&self, tol: &Tolerances) -> Result<Vec<Complex64>> {
        let deg = match self.degree() {
            Some(d) if d >= 1 => d,
            _ => return Err(Error::ConstantPolynomial),
        };
        // exact zeros at the origin
        let zeros = self.coeffs.iter().take_while(|c| **c == 0.0).count();
        let reduced = &self.coeffs[zeros..];
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        let n = reduced.len() - 1;
        if n == 1 {
            roots.push(Complex64::new(-reduced[0] / reduced[1], 0.0));
        } else if n > 1 {
            let lead = reduced[n];
            let mut m = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                m[(0, j)] = -reduced[n - 1 - j] / lead;
            }
            for i in 1..n {
                m[(i, i - 1)] = 1.0;
            }
            balance(&mut m);
            let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::RootResidual {
                residual: f64::INFINITY,
                bound: 0.0,
            })?;
            roots.extend(schur.complex_eigenvalues().iter().copied());
        }

        let dp = self.derivative();
        for r in roots.iter_mut() {
            for _ in 0..2 {
                let val = self.eval(*r);
                let d = dp.eval(*r);
                if d.norm() == 0.0 || val.norm() == 0.0 {
                    break;
                }
                let cand = *r - val / d;
                if cand.is_finite() && self.eval(cand).norm() <= val.norm() {
                    *r = cand;
                } else {
                    break;
                }
            }
        }
        symmetrize_conjugates(&mut roots);

        let scale = self.abs_sum();
        for r in &roots {
            let bound = tol.resid * scale * r.norm().max(1.0).powi(deg as i32);
            let residual = self.eval(*r).norm();
            if residual.is_nan() || residual > bound {
                return Err(Error::RootResidual { residual, bound });
            }
        }
        Ok(roots)
    }

    /// Divide out a root at `z = 1`: returns `q` with `p(z) = (1 - z) q(z)`.
    pub fn deflate_at_one(&self) -> Result<Poly> {
        self.deflate_at_one_with(&Tolerances::default())
    }

    pub fn deflate_at_one_with(&self, tol: &Tolerances) -> Result<Poly> {
        let value = self.eval_real(1.0);
        if self.is_zero() || value.abs() > tol.zero_at_one * self.abs_sum() {
            return Err(Error::NoZeroAtOne { value });
        }
        Ok(Poly::new(divide_one_minus_z(&self.coeffs)))
    }
}

/// Synthetic division by `(1 - z)`; the remainder `p(1)` is discarded.
fn divide_one_minus_z(a: &[f64]) -> Vec<f64> {
    // a_i = b_i - b_{i-1}  =>  b_i = a_i + b_{i-1}
    let mut out = Vec::with_capacity(a.len().saturating_sub(1));
    let mut acc = 0.0;
    for &c in &a[..a.len().saturating_sub(1)] {
        acc += c;
        out.push(acc);
    }
    out
}

fn expand_monic(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c
}

/// Parlett-Reinsch balancing with radix 2.
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= inv;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Force roots of a real polynomial into exact conjugate pairs.
fn symmetrize_conjugates(roots: &mut [Complex64]) {
    let mut upper: Vec<usize> = Vec::new();
    let mut lower: Vec<usize> = Vec::new();
    for (i, r) in roots.iter().enumerate() {
        if r.im > 0.0 {
            upper.push(i);
        } else if r.im < 0.0 {
            lower.push(i);
        }
    }
    // unmatched excess: the smallest imaginary parts are real roots
    let by_im = |v: &mut Vec<usize>, roots: &[Complex64]| {
        v.sort_by(|&a, &b| roots[a].im.abs().total_cmp(&roots[b].im.abs()));
    };
    by_im(&mut upper, roots);
    by_im(&mut lower, roots);
    while upper.len() > lower.len() {
        let i = upper.remove(0);
        roots[i].im = 0.0;
    }
    while lower.len() > upper.len() {
        let i = lower.remove(0);
        roots[i].im = 0.0;
    }
    let mut free = lower;
    for &i in upper.iter().rev() {
        let target = roots[i].conj();
        let (pos, _) = free
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                (roots[a] - target)
                    .norm()
                    .total_cmp(&(roots[b] - target).norm())
            })
            .expect("balanced conjugate lists");
        let j = free.swap_remove(pos);
        let avg = (roots[i] + roots[j].conj()) * 0.5;
        roots[i] = avg;
        roots[j] = avg.conj();
    }
}

/// Symmetric Laurent polynomial `c_0 + sum_h c_h (z^h + z^-h)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct SymLaurent {
    c: Vec<f64>,
}

impl From<Vec<f64>> for SymLaurent {
    fn from(c: Vec<f64>) -> Self {
        Self::new(c)
    }
}

impl From<SymLaurent> for Vec<f64> {
    fn from(s: SymLaurent) -> Self {
        s.c
    }
}

impl SymLaurent {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c: trim(c) }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Highest power `d`; `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// `Q(z)Q(1/z) - P(z)P(1/z)` as a symmetric Laurent polynomial.
    pub fn product_diff(p: &Poly, q: &Poly) -> SymLaurent {
        let auto = |a: &[f64], h: usize| -> f64 {
            a.iter()
                .zip(a.iter().skip(h))
                .map(|(x, y)| x * y)
                .sum::<f64>()
        };
        let n = p.coeffs().len().max(q.coeffs().len());
        SymLaurent::new(
            (0..n)
                .map(|h| auto(q.coeffs(), h) - auto(p.coeffs(), h))
                .collect(),
        )
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let mut acc = Complex64::new(self.c.first().copied().unwrap_or(0.0), 0.0);
        let (mut zp, mut zn) = (z, zi);
        for &ch in self.c.iter().skip(1) {
            acc += (zp + zn) * ch;
            zp *= z;
            zn *= zi;
        }
        acc
    }

    /// Value at `z = e^{it}`: `c_0 + 2 sum c_h cos(h t)`.
    pub fn eval_circle(&self, t: f64) -> f64 {
        self.c
            .iter()
            .enumerate()
            .map(|(h, &ch)| {
                if h == 0 {
                    ch
                } else {
                    2.0 * ch * (h as f64 * t).cos()
                }
            })
            .sum()
    }

    /// Value at `z = 1`.
    pub fn value_at_one(&self) -> f64 {
        self.eval_circle(0.0)
    }

    /// `|c_0| + 2 sum |c_h|`, the absolute coefficient sum of `z^d N(z)`.
    pub fn abs_sum(&self) -> f64 {
        self.c
            .iter()
            .enumerate()
            .map(|(h, c)| if h == 0 { c.abs() } else { 2.0 * c.abs() })
            .sum()
    }

    /// The ordinary polynomial `z^d N(z)` of degree `2d`.
    pub fn to_poly(&self) -> Poly {
        let Some(d) = self.degree() else {
            return Poly::zero();
        };
        let mut out = vec![0.0; 2 * d + 1];
        for (h, &ch) in self.c.iter().enumerate() {
            out[d + h] = ch;
            out[d - h] = ch;
        }
        Poly::new(out)
    }

    /// Returns `m` with `N(z) = (2 - z - 1/z) m(z)`.
    pub fn divide_unit_pair(&self) -> Result<SymLaurent> {
        self.divide_unit_pair_with(&Tolerances::default())
    }

    pub fn divide_unit_pair_with(&self, tol: &Tolerances) -> Result<SymLaurent> {
        let value = self.value_at_one();
        let d = match self.degree() {
            Some(d) if d >= 1 && value.abs() <= tol.zero_at_one * self.abs_sum() => d,
            _ => return Err(Error::MissingUnitPair { value }),
        };
        let mut full = vec![0.0; 2 * d + 1];
        for (h, &ch) in self.c.iter().enumerate() {
            full[d + h] = ch;
            full[d - h] = ch;
        }
        // z^d N(z) = -(1 - z)^2 z^{d-1} m(z)
        let once = divide_one_minus_z(&full);
        let twice = divide_one_minus_z(&once);
        let mid = d - 1;
        let m = (0..d)
            .map(|h| -0.5 * (twice[mid + h] + twice[mid - h]))
            .collect();
        Ok(SymLaurent::new(m))
    }

    /// Spectral factor `(theta, k)` with the default tolerances.
    pub fn factor_outside(&self) -> Result<(Poly, f64)> {
        self.factor_outside_with(&Tolerances::default())
    }

    /// Factor `N(z) = k theta(z) theta(1/z)` with `theta(0) = 1`, all zeros of
    /// `theta` strictly outside the unit circle and `k > 0`.
    pub fn factor_outside_with(&self, tol: &Tolerances) -> Result<(Poly, f64)> {
        let min = (0..POSITIVITY_GRID)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * (j + 1) as f64 / POSITIVITY_GRID as f64;
                self.eval_circle(t)
            })
            .fold(f64::INFINITY, f64::min);
        if min.is_nan() || min <= 0.0 {
            return Err(Error::NotSpectralDensity { min });
        }
        let q = self.degree().unwrap_or(0);
        if q == 0 {
            return Ok((Poly::one(), self.c[0]));
        }
        let roots = self.to_poly().roots_with(tol)?;
        if let Some(r) = roots.iter().find(|r| (r.norm() - 1.0).abs() < tol.circle) {
            return Err(Error::ZeroOnUnitCircle { modulus: r.norm() });
        }

        let mut free = roots;
        let mut outside = Vec::with_capacity(q);
        while let Some(a) = free.pop() {
            let (pos, mismatch) = free
                .iter()
                .enumerate()
                .map(|(j, b)| (j, (a * b - 1.0).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .ok_or(Error::RootPairing {
                    mismatch: f64::INFINITY,
                })?;
            if mismatch > tol.pairing {
                return Err(Error::RootPairing { mismatch });
            }
            let b = free.swap_remove(pos);
            outside.push(if a.norm() > b.norm() { a } else { b });
        }

        // theta(z) = prod (1 - z/a)
        let mut theta = vec![Complex64::new(1.0, 0.0)];
        for a in &outside {
            let ai = a.inv();
            let mut next = vec![Complex64::new(0.0, 0.0); theta.len() + 1];
            for (i, &t) in theta.iter().enumerate() {
                next[i] += t;
                next[i + 1] -= t * ai;
            }
            theta = next;
        }
        let scale = theta.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let residue = theta.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        if residue > 1e-10 * scale {
            return Err(Error::RootPairing { mismatch: residue });
        }
        let theta = Poly::new(theta.iter().map(|c| c.re).collect());
        let t1 = theta.eval_real(1.0);
        let k = self.value_at_one() / (t1 * t1);
        Ok((theta, k))
    }
}

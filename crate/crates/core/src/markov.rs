//! Second-order Markov structure of renewal chains with a constant hazard
//! after lag 2.
//!
//! Index convention: `1` is time `t`, `2` is `t-1`, `3` is `t-2`. For example
//! `p13 = P(X_t = 1, X_{t-1} = 0, X_{t-2} = 1)`, and `p1g01` is
//! `P(X_t = 1 | X_{t-1} = 0, X_{t-2} = 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::LifetimeSpec;
use crate::simulate::{context_counts, decode_context, MIN_CONTEXT_COUNT};

/// Joint law of `(X_t, X_{t-1}, X_{t-2})` for one chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriJointTable {
    pub q: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p12: f64,
    pub p13: f64,
    pub p23: f64,
    pub p123: f64,
}

fn require_p2(spec: &LifetimeSpec) -> Result<(f64, f64)> {
    if spec.p() != 2 {
        return Err(Error::UnsupportedOrder(format!(
            "closed-form Markov tables need a head of length 2, got {}",
            spec.p()
        )));
    }
    Ok((spec.head()[0], spec.head()[1]))
}

impl TriJointTable {
    /// `P(X_t = a, X_{t-1} = b, X_{t-2} = c)`.
    pub fn prob(&self, a: u8, b: u8, c: u8) -> f64 {
        match (a, b, c) {
            (0, 0, 0) => self.q,
            (1, 0, 0) => self.p1,
            (0, 1, 0) => self.p2,
            (0, 0, 1) => self.p3,
            (1, 1, 0) => self.p12,
            (1, 0, 1) => self.p13,
            (0, 1, 1) => self.p23,
            (1, 1, 1) => self.p123,
            _ => panic!("bits must be 0 or 1"),
        }
    }

    pub fn total(&self) -> f64 {
        self.q + self.p1 + self.p2 + self.p3 + self.p12 + self.p13 + self.p23 + self.p123
    }

    /// `P(X = 1)` at coordinate `0` (time t), `1` (t-1) or `2` (t-2).
    pub fn marginal(&self, coord: usize) -> f64 {
        let mut s = 0.0;
        for code in 0..8u8 {
            let bits = [code & 1, (code >> 1) & 1, (code >> 2) & 1];
            if bits[coord] == 1 {
                s += self.prob(bits[0], bits[1], bits[2]);
            }
        }
        s
    }

    /// Law of the older pair `(X_{t-1}, X_{t-2}) = (b, c)`.
    pub fn pair(&self, b: u8, c: u8) -> f64 {
        self.prob(0, b, c) + self.prob(1, b, c)
    }
}

/// Joint probabilities for a head `(f_1, f_2)`.
pub fn joint_probs_p2(spec: &LifetimeSpec) -> Result<TriJointTable> {
    let (f1, f2) = require_p2(spec)?;
    let inv_mu = 1.0 / spec.mean();
    let p1 = inv_mu * (1.0 - f1 - f2);
    let p13 = inv_mu * f2;
    let p12 = inv_mu * f1 * (1.0 - f1);
    let p123 = inv_mu * f1 * f1;
    let p2 = inv_mu * (1.0 - f1) * (1.0 - f1);
    let rest = 2.0 * p1 + p2 + 2.0 * p12 + p13 + p123;
    Ok(TriJointTable {
        q: 1.0 - rest,
        p1,
        p2,
        p3: p1,
        p12,
        p13,
        p23: p12,
        p123,
    })
}

/// `P(X_t | X_{t-1}, X_{t-2})` for all eight outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalsP2 {
    pub p1g00: f64,
    pub p1g01: f64,
    pub p1g10: f64,
    pub p1g11: f64,
    pub p0g00: f64,
    pub p0g01: f64,
    pub p0g10: f64,
    pub p0g11: f64,
}

impl ConditionalsP2 {
    /// `P(X_t = 1 | X_{t-1} = b, X_{t-2} = c)`.
    pub fn one_given(&self, b: u8, c: u8) -> f64 {
        match (b, c) {
            (0, 0) => self.p1g00,
            (0, 1) => self.p1g01,
            (1, 0) => self.p1g10,
            (1, 1) => self.p1g11,
            _ => panic!("bits must be 0 or 1"),
        }
    }
}

pub fn conditional_probs_p2(spec: &LifetimeSpec) -> Result<ConditionalsP2> {
    let (f1, f2) = require_p2(spec)?;
    if f1 >= 1.0 {
        return Err(Error::InvalidSpec("f_1 = 1 leaves P(X_{t-1}=0) = 0".into()));
    }
    let r = spec.r();
    let p1g01 = f2 / (1.0 - f1);
    Ok(ConditionalsP2 {
        p1g00: 1.0 - r,
        p1g01,
        p1g10: f1,
        p1g11: f1,
        p0g00: r,
        p0g01: (1.0 - f1 - f2) / (1.0 - f1),
        p0g10: 1.0 - f1,
        p0g11: 1.0 - f1,
    })
}

/// `q / P(X_{t-1} = 0, X_{t-2} = 0)` with the mean written as
/// `1 - f_1 + (2 - r - f_1 - f_2)/(1 - r)`; equals `r`.
pub fn p0g00_long_form(spec: &LifetimeSpec) -> Result<f64> {
    let (f1, f2) = require_p2(spec)?;
    let r = spec.r();
    let inv_mu = 1.0 / (1.0 - f1 + (2.0 - r - f1 - f2) / (1.0 - r));
    let table = joint_probs_p2(spec)?;
    let rest = table.p1 + table.p2 + table.p3 + table.p12 + table.p13 + table.p23 + table.p123;
    Ok((1.0 - rest) / (1.0 - 2.0 * inv_mu + f1 * inv_mu))
}

/// Trivariate binomial moment generating function
/// `E[exp(s1 Y_t + s2 Y_{t-1} + s3 Y_{t-2})]` for `m` superposed chains.
pub fn mgf_trivariate(table: &TriJointTable, m: u32, s: [f64; 3]) -> f64 {
    let e = s.map(f64::exp);
    let base = table.q
        + table.p1 * e[0]
        + table.p2 * e[1]
        + table.p3 * e[2]
        + table.p12 * e[0] * e[1]
        + table.p13 * e[0] * e[2]
        + table.p23 * e[1] * e[2]
        + table.p123 * e[0] * e[1] * e[2];
    base.powi(m as i32)
}

/// Comparison of one context against its parent (the context with the
/// furthest lag dropped).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextDivergence {
    /// `(x_{t-1}, .., x_{t-order-1})`.
    pub context: Vec<u8>,
    pub count: u64,
    pub parent_count: u64,
    pub freq: f64,
    pub parent_freq: f64,
    /// `|freq - parent_freq|`.
    pub divergence: f64,
    /// Pooled standard error of the divergence under the lower-order hypothesis.
    pub se: f64,
    pub z: f64,
    pub sparse: bool,
}

/// Divergences between context lengths `order + 1` and `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderDivergence {
    pub order: usize,
    pub max_divergence: f64,
    pub max_z: f64,
    pub contexts: Vec<ContextDivergence>,
}

/// Per-order refinement report; `orders[o]` compares length `o + 1` with `o`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderTestReport {
    pub orders: Vec<OrderDivergence>,
}

impl OrderTestReport {
    pub fn order(&self, o: usize) -> Option<&OrderDivergence> {
        self.orders.iter().find(|d| d.order == o)
    }
}

/// For `o = 0..max_order`, compare `P(1 | context of length o+1)` with
/// `P(1 | same context truncated to length o)`.
///
/// The standard error pools both sibling contexts:
/// `se = (n_sib / n_parent) sqrt(pbar (1 - pbar) (1/n + 1/n_sib))`.
/// Contexts with fewer than [`MIN_CONTEXT_COUNT`] observations are reported
/// but left out of the maxima.
pub fn markov_order_test(bits: &[u8], max_order: usize) -> Result<OrderTestReport> {
    if max_order == 0 || max_order > 16 {
        return Err(Error::InvalidArgument(format!(
            "max_order = {max_order} must be in 1..=16"
        )));
    }
    // align all orders on the same time window
    let window = &bits[max_order.min(bits.len())..];
    let offset = bits.len() - window.len();
    let counts = |order: usize| context_counts(&bits[offset - order..], order);

    let mut orders = Vec::with_capacity(max_order);
    for o in 0..max_order {
        let (child_n, child_ones) = counts(o + 1);
        let (parent_n, parent_ones) = counts(o);
        let mut contexts = Vec::with_capacity(child_n.len());
        for code in 0..child_n.len() {
            let parent = code & ((1 << o) - 1);
            let sibling = code ^ (1 << o);
            let (n, ns, np) = (child_n[code], child_n[sibling], parent_n[parent]);
            let freq = child_ones[code] as f64 / n as f64;
            let pbar = parent_ones[parent] as f64 / np as f64;
            let divergence = (freq - pbar).abs();
            let se = if n > 0 && ns > 0 {
                (ns as f64 / np as f64)
                    * (pbar * (1.0 - pbar) * (1.0 / n as f64 + 1.0 / ns as f64)).sqrt()
            } else {
                f64::NAN
            };
            contexts.push(ContextDivergence {
                context: decode_context(code, o + 1),
                count: n,
                parent_count: np,
                freq,
                parent_freq: pbar,
                divergence,
                se,
                z: divergence / se,
                sparse: n < MIN_CONTEXT_COUNT || ns < MIN_CONTEXT_COUNT,
            });
        }
        let dense = contexts.iter().filter(|c| !c.sparse);
        let max_divergence = dense.clone().fold(0.0, |m: f64, c| m.max(c.divergence));
        let max_z = dense.fold(0.0, |m: f64, c| if c.z.is_nan() { m } else { m.max(c.z) });
        orders.push(OrderDivergence {
            order: o,
            max_divergence,
            max_z,
            contexts,
        });
    }
    Ok(OrderTestReport { orders })
}

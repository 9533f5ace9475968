//! Seeded simulation of stationary renewal chains and their superposition.
//!
//! Every chain draws from its own ChaCha8 stream: chain `i` of a run with
//! seed `s` uses `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. The
//! summed series is therefore identical however the chains are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::LifetimeSpec;

/// Contexts seen fewer times than this are flagged as sparse.
pub const MIN_CONTEXT_COUNT: u64 = 1000;

/// RNG for chain `index` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Precomputed inverse-CDF tables for lifetimes and equilibrium delays.
#[derive(Clone, Debug)]
pub struct LifetimeSampler {
    p: usize,
    r: f64,
    lifetime_cdf: Vec<f64>,
    delay_cdf: Vec<f64>,
}

impl LifetimeSampler {
    pub fn new(spec: &LifetimeSpec) -> Self {
        let cumsum = |it: &mut dyn Iterator<Item = f64>| {
            let mut acc = 0.0;
            it.map(|v| {
                acc += v;
                acc
            })
            .collect::<Vec<_>>()
        };
        let p = spec.p();
        Self {
            p,
            r: spec.r(),
            lifetime_cdf: cumsum(&mut spec.head().iter().copied()),
            delay_cdf: cumsum(&mut (0..p).map(|n| spec.equilibrium_pmf(n))),
        }
    }

    /// `floor(log(v) / log(r))` for `v` uniform on `(0, 1]`: the number of
    /// extra steps spent in a geometric tail.
    fn tail_steps<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.r == 0.0 {
            return 0;
        }
        let v = 1.0 - rng.random::<f64>();
        (v.ln() / self.r.ln()).floor() as usize
    }

    /// Draw a lifetime `L >= 1`.
    pub fn lifetime<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        match self.lifetime_cdf.iter().position(|&c| u < c) {
            Some(i) => i + 1,
            None => self.p + 1 + self.tail_steps(rng),
        }
    }

    /// Draw an equilibrium delay `L_0 >= 0` with `P(L_0 = n) = P(L > n)/mu`.
    pub fn delay<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        match self.delay_cdf.iter().position(|&c| u < c) {
            Some(n) => n,
            None => self.p + self.tail_steps(rng),
        }
    }

    /// Renewal indicators `X_0..X_{steps-1}` of a stationary delayed process.
    pub fn chain<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> Vec<u8> {
        let mut bits = vec![0u8; steps];
        let mut t = self.delay(rng);
        while t < steps {
            bits[t] = 1;
            t += self.lifetime(rng);
        }
        bits
    }
}

pub fn sample_lifetime<R: Rng + ?Sized>(spec: &LifetimeSpec, rng: &mut R) -> usize {
    LifetimeSampler::new(spec).lifetime(rng)
}

pub fn sample_equilibrium_delay<R: Rng + ?Sized>(spec: &LifetimeSpec, rng: &mut R) -> usize {
    LifetimeSampler::new(spec).delay(rng)
}

pub fn simulate_chain<R: Rng + ?Sized>(spec: &LifetimeSpec, steps: usize, rng: &mut R) -> Vec<u8> {
    LifetimeSampler::new(spec).chain(steps, rng)
}

/// Simulation parameters: lifetime, number of superposed chains, length, seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: LifetimeSpec,
    #[serde(rename = "M")]
    pub m: u32,
    pub steps: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Binomial count series `Y_t = sum_i X_{i,t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub values: Vec<u32>,
    pub config: SimConfig,
}

/// Superpose `M` independent stationary chains.
pub fn simulate_counts(config: &SimConfig) -> Result<CountSeries> {
    config.validate()?;
    let sampler = LifetimeSampler::new(&config.spec);
    let chains: Vec<Vec<u8>> = (0..config.m as u64)
        .into_par_iter()
        .map(|i| sampler.chain(config.steps, &mut chain_rng(config.seed, i)))
        .collect();
    let mut values = vec![0u32; config.steps];
    for chain in &chains {
        for (v, &b) in values.iter_mut().zip(chain) {
            *v += b as u32;
        }
    }
    Ok(CountSeries {
        values,
        config: config.clone(),
    })
}

pub fn sample_mean<T: Copy + Into<f64>>(x: &[T]) -> f64 {
    x.iter().map(|&v| v.into()).sum::<f64>() / x.len() as f64
}

/// Biased sample autocovariance (divisor `n`), positive semidefinite.
pub fn sample_acvf<T: Copy + Into<f64>>(x: &[T], hmax: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if hmax >= n {
        return Err(Error::InvalidArgument(format!(
            "hmax = {hmax} must be below the series length {n}"
        )));
    }
    let mean = sample_mean(x);
    let centered: Vec<f64> = x.iter().map(|&v| v.into() - mean).collect();
    Ok((0..=hmax)
        .map(|h| {
            centered
                .iter()
                .zip(&centered[h..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect())
}

/// Conditional frequency of `x_t = 1` given one context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextFreq {
    /// `(x_{t-1}, .., x_{t-order})`.
    pub context: Vec<u8>,
    pub count: u64,
    pub ones: u64,
    pub freq: f64,
    pub sparse: bool,
}

/// Empirical conditionals of a bit sequence for every context of one order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub order: usize,
    pub contexts: Vec<ContextFreq>,
}

impl ConditionalTable {
    /// Entry for a context `(x_{t-1}, .., x_{t-order})`.
    pub fn get(&self, context: &[u8]) -> Option<&ContextFreq> {
        self.contexts.iter().find(|c| c.context == context)
    }
}

/// Context code with bit `j` holding `x_{t-1-j}`.
pub(crate) fn context_counts(bits: &[u8], order: usize) -> (Vec<u64>, Vec<u64>) {
    let size = 1usize << order;
    let (mut count, mut ones) = (vec![0u64; size], vec![0u64; size]);
    for t in order..bits.len() {
        let code = (0..order).fold(0usize, |c, j| c | ((bits[t - 1 - j] as usize) << j));
        count[code] += 1;
        ones[code] += bits[t] as u64;
    }
    (count, ones)
}

pub(crate) fn decode_context(code: usize, order: usize) -> Vec<u8> {
    (0..order).map(|j| ((code >> j) & 1) as u8).collect()
}

/// Frequencies of `x_t = 1` for each context of length `order` (1..=3).
pub fn empirical_conditionals(bits: &[u8], order: usize) -> Result<ConditionalTable> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "context order {order} must be 1, 2 or 3"
        )));
    }
    let (count, ones) = context_counts(bits, order);
    let contexts = (0..count.len())
        .map(|code| ContextFreq {
            context: decode_context(code, order),
            count: count[code],
            ones: ones[code],
            freq: if count[code] > 0 {
                ones[code] as f64 / count[code] as f64
            } else {
                f64::NAN
            },
            sparse: count[code] < MIN_CONTEXT_COUNT,
        })
        .collect();
    Ok(ConditionalTable { order, contexts })
}

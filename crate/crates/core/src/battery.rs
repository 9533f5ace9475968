//! Seeded random lifetimes with a constant hazard after lag `p`.
//!
//! The `p` head probabilities and the tail mass are drawn as `U(0.2, 1)`
//! weights and normalized; the tail ratio is `U(0.05, 0.85)`. Every draw is
//! valid and nonlattice with `0 < f_1 < 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lifetime::LifetimeSpec;

/// Default seed for the shared battery.
pub const BATTERY_SEED: u64 = 20_240_601;

/// One random spec with head length `p`.
pub fn random_spec<R: Rng + ?Sized>(p: usize, rng: &mut R) -> LifetimeSpec {
    assert!(p >= 1, "head length must be positive");
    let w: Vec<f64> = (0..=p).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = w.iter().sum();
    let head = w[..p].iter().map(|v| v / total).collect();
    let r = rng.random_range(0.05..0.85);
    LifetimeSpec::constant_hazard(head, r).expect("battery draws are valid")
}

/// `per_order` specs for each head length in `orders`, seeded.
pub fn battery(
    seed: u64,
    orders: impl IntoIterator<Item = usize>,
    per_order: usize,
) -> Vec<LifetimeSpec> {
    let mut out = Vec::new();
    for p in orders {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(p as u64);
        out.extend((0..per_order).map(|_| random_spec(p, &mut rng)));
    }
    out
}

/// 200 specs for each `p` in `1..=5`.
pub fn standard_battery() -> Vec<LifetimeSpec> {
    battery(BATTERY_SEED, 1..=5, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_shape_and_determinism() {
        let a = battery(1, 1..=3, 10);
        assert_eq!(a.len(), 30);
        assert_eq!(a, battery(1, 1..=3, 10));
        assert!(a[..10].iter().all(|s| s.p() == 1));
        for s in &a {
            let f1 = s.head()[0];
            assert!(f1 > 0.0 && f1 < 1.0);
            assert!(s.tail_mass() > 0.0);
            assert!((0.05..0.85).contains(&s.r()));
        }
    }
}

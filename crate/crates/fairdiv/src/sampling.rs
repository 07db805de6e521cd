//! Seeded random profile samplers for the property-test suites.
//!
//! Every sampler draws from a caller-supplied ChaCha stream so that a test
//! run is fully determined by its seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::rational_int;
use crate::valuation::{AdditiveValuation, CoverageValuation, MultiplicativeValuation, Valuation};

/// A deterministic random stream for the given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` additive valuations over `m` goods with integer values in
/// `0..=max_value`.
pub fn sample_additive_profile(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: u32,
    max_value: i64,
) -> Vec<Valuation> {
    (0..n)
        .map(|_| {
            let values = (0..m).map(|_| rational_int(rng.gen_range(0..=max_value))).collect();
            Valuation::Additive(AdditiveValuation::new(values).expect("non-negative values"))
        })
        .collect()
}

/// `n` multiplicative valuations over `m` goods with integer factors in
/// `1..=max_factor`.
pub fn sample_multiplicative_profile(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: u32,
    max_factor: i64,
) -> Vec<Valuation> {
    (0..n)
        .map(|_| {
            let factors = (0..m).map(|_| rational_int(rng.gen_range(1..=max_factor))).collect();
            Valuation::Multiplicative(
                MultiplicativeValuation::new(factors).expect("factors at least one"),
            )
        })
        .collect()
}

/// `n` unit-weight coverage valuations over `m` goods, each good covering
/// an independent random subset of a `universe`-element ground set.
pub fn sample_coverage_profile(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: u32,
    universe: u32,
) -> Vec<Valuation> {
    (0..n)
        .map(|_| {
            let sets = (0..m)
                .map(|_| (0..universe).filter(|_| rng.gen_bool(0.5)).collect())
                .collect();
            Valuation::Coverage(CoverageValuation::unit(universe, sets).expect("in range"))
        })
        .collect()
}

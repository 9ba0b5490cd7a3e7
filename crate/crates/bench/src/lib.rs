//! Deterministic workloads shared by the benchmarks.

use freeprob::models::{compound_free_poisson, scalar_family};
use freeprob::{CumulantFunctional, MomentFunctional, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Moment table over `k` letters with small random rational entries.
pub fn random_moments(k: usize, order: usize, seed: u64) -> MomentFunctional {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (1..=k).map(|i| format!("x{}", i)).collect();
    MomentFunctional::from_fn(names, order, |_| {
        Rational::new(BigInt::from(rng.gen_range(-20..=20)), BigInt::from(rng.gen_range(1..=6)))
    })
    .unwrap()
}

/// A compound free Poisson law over commuting atoms, positive by construction.
pub fn compound(k: usize, order: usize) -> CumulantFunctional {
    let atoms: Vec<Rational> = (1..=k as i64).map(|i| Rational::new(BigInt::from(i), BigInt::from(2))).collect();
    let base = scalar_family(&atoms, order).unwrap();
    compound_free_poisson(&Rational::from_integer(BigInt::from(2)), &base, order).unwrap()
}

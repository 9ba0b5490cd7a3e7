mod common;

use freeprob::cumulant::{cumulants_to_moments_by_partitions, moments_to_cumulants_by_mobius};
use freeprob::models::free_poisson;
use freeprob::scalar::{pow, ratio};
use freeprob::{cumulants_to_moments, enumerate_nc, moments_to_cumulants, MomentFunctional, Rational, Word};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(seed: u64, order: usize) -> MomentFunctional {
    common::moment_table(&mut ChaCha8Rng::seed_from_u64(seed), order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roundtrip_is_exact(seed in any::<u64>(), order in 1usize..=6) {
        let mf = table(seed, order);
        let cf = moments_to_cumulants(&mf);
        prop_assert_eq!(cumulants_to_moments(&cf), mf.clone());
        let back = moments_to_cumulants(&cumulants_to_moments(&cf));
        prop_assert_eq!(back, cf);
    }

    #[test]
    fn fast_transforms_agree_with_lattice_sums(seed in any::<u64>(), order in 1usize..=5) {
        let mf = table(seed, order);
        let cf = moments_to_cumulants(&mf);
        prop_assert_eq!(&cf, &moments_to_cumulants_by_mobius(&mf));
        prop_assert_eq!(cumulants_to_moments_by_partitions(&cf), mf);
    }

    #[test]
    fn first_cumulants_are_means(seed in any::<u64>()) {
        let mf = table(seed, 3);
        let cf = moments_to_cumulants(&mf);
        for l in 0..2 {
            prop_assert_eq!(cf.cumulant(&[l]).unwrap(), mf.moment(&[l]).unwrap());
        }
    }

    #[test]
    fn cumulants_are_multilinear(seed in any::<u64>(), c in -5i64..=5, d in 1i64..=4) {
        let c = ratio(c, d);
        let mf = table(seed, 5);
        let count = |w: &Word| w.letters().iter().filter(|&&l| l == 0).count();
        let scaled = MomentFunctional::from_fn(mf.alphabet().to_vec(), 5, |w| pow(&c, count(w)) * mf.moment(&w.0).unwrap()).unwrap();
        let (cf, cs) = (moments_to_cumulants(&mf), moments_to_cumulants(&scaled));
        for (w, v) in cs.iter() {
            prop_assert_eq!(v.clone(), pow(&c, count(&w)) * cf.cumulant(&w.0).unwrap());
        }
        let uniform = MomentFunctional::from_fn(mf.alphabet().to_vec(), 5, |w| pow(&c, w.len()) * mf.moment(&w.0).unwrap()).unwrap();
        for (w, v) in moments_to_cumulants(&uniform).iter() {
            prop_assert_eq!(v.clone(), pow(&c, w.len()) * cf.cumulant(&w.0).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn roundtrip_is_exact_at_order_eight(seed in any::<u64>()) {
        let mf = table(seed, 8);
        prop_assert_eq!(cumulants_to_moments(&moments_to_cumulants(&mf)), mf);
    }
}

#[test]
fn free_poisson_moments_count_blocks() {
    for lambda in [ratio(1, 1), ratio(2, 1), ratio(1, 2)] {
        let mf = cumulants_to_moments(&free_poisson(&lambda, &Rational::one(), 8).unwrap());
        for n in 1..=8 {
            let expected = enumerate_nc(n)
                .unwrap()
                .iter()
                .fold(Rational::zero(), |acc, p| acc + pow(&lambda, p.num_blocks()));
            assert_eq!(mf.moment(&vec![0; n]).unwrap(), expected, "lambda = {}, n = {}", lambda, n);
        }
    }
}

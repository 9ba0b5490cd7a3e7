mod common;

use freeprob::fock::{FockConfig, FockModel, FockOperator};
use freeprob::limits::dilate;
use freeprob::linalg::{mat_mul, transpose};
use freeprob::models::{compound_free_poisson, semicircle_family, CovarianceMatrix};
use freeprob::scalar::ratio;
use freeprob::{check_freeness, cumulants_to_moments, CumulantFunctional, MomentFunctional, Rational, Word};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(degree: usize, particles: usize) -> FockConfig {
    let mut c = FockConfig::new(degree, particles);
    c.breakpoints = vec![ratio(0, 1), ratio(1, 2), ratio(1, 1), ratio(2, 1)];
    c
}

/// A finitely supported distribution of two commuting variables.
fn atoms(seed: u64, order: usize) -> MomentFunctional {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(Rational, Rational, Rational)> = (0..2)
        .map(|_| (common::rational(rng, false) + ratio(1, 1), common::rational(rng, true), common::rational(rng, true)))
        .collect();
    let total: Rational = pts.iter().map(|p| p.0.clone()).sum();
    MomentFunctional::from_fn(vec!["x".into(), "y".into()], order, |w: &Word| {
        pts.iter()
            .map(|(m, x, y)| m * w.letters().iter().fold(ratio(1, 1), |acc, &l| acc * if l == 0 { x } else { y }))
            .sum::<Rational>()
            / &total
    })
    .unwrap()
}

fn covariance(off: i64) -> CovarianceMatrix {
    CovarianceMatrix::new(vec![vec![ratio(2, 1), ratio(off, 2)], vec![ratio(off, 2), ratio(1, 1)]]).unwrap()
}

fn process_moments(model: &FockModel<Rational>, t: &Rational, order: usize) -> MomentFunctional {
    let ops: Vec<FockOperator<Rational>> = (0..2).map(|i| model.levy_process(i, t).unwrap()).collect();
    model.vacuum_moments(vec!["x".into(), "y".into()], &ops, order).unwrap()
}

fn assert_exact(cf: &CumulantFunctional, model: &FockModel<Rational>, order: usize) -> Result<(), TestCaseError> {
    for t in [ratio(1, 2), ratio(1, 1), ratio(2, 1)] {
        let expected = cumulants_to_moments(&dilate(&cf.truncate(order), &t).unwrap());
        prop_assert_eq!(process_moments(model, &t, order), expected.renamed(vec!["x".into(), "y".into()]).unwrap(), "t = {}", t);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn semicircle_process_is_exact(off in -2i64..=2) {
        let cf = semicircle_family(&covariance(off), 4).unwrap();
        let model = FockModel::build(&cf, 2, &config(2, 2)).unwrap();
        assert_exact(&cf, &model, 4)?;
    }

    #[test]
    fn compound_process_is_exact(seed in any::<u64>(), lambda in (1i64..=6).prop_map(|n| ratio(n, 2))) {
        let cf = compound_free_poisson(&lambda, &atoms(seed, 4), 4).unwrap();
        let model = FockModel::build(&cf, 2, &config(2, 2)).unwrap();
        assert_exact(&cf, &model, 4)?;
    }

    #[test]
    fn disjoint_increments_are_free(seed in any::<u64>()) {
        let cf = compound_free_poisson(&ratio(1, 1), &atoms(seed, 4), 4).unwrap();
        let model = FockModel::build(&cf, 2, &config(2, 2)).unwrap();
        let (h, one) = (ratio(1, 2), ratio(1, 1));
        let ops = vec![
            model.levy_increment(0, &Rational::zero(), &h).unwrap(),
            model.levy_increment(0, &h, &one).unwrap(),
        ];
        let joint = model.vacuum_moments(vec!["u".into(), "v".into()], &ops, 4).unwrap();
        let report = check_freeness(&joint, &[vec![0], vec![1]], 4, &Rational::zero()).unwrap();
        prop_assert!(report.is_free(), "{:?}", report.violations);
    }

    #[test]
    fn n_increments_reach_at_most_n_particles(seed in any::<u64>(), n in 1usize..=3) {
        let cf = compound_free_poisson(&ratio(1, 1), &atoms(seed, 4), 4).unwrap();
        let model = FockModel::build(&cf, 2, &config(2, 3)).unwrap();
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let ops: Vec<FockOperator<Rational>> = (0..n)
            .map(|_| {
                use rand::Rng;
                model.levy_increment(rng.gen_range(0..2), &ratio(0, 1), &ratio(1, 1)).unwrap()
            })
            .collect();
        let refs: Vec<&FockOperator<Rational>> = ops.iter().collect();
        let top = model.apply_product_to_vacuum(&refs).top_level().unwrap_or(0);
        prop_assert!(top <= n);
    }

    #[test]
    fn increments_are_self_adjoint(off in -2i64..=2, s in 0usize..=2, len in 1usize..=2) {
        let cf = semicircle_family(&covariance(off), 5).unwrap();
        let model = FockModel::build(&cf, 2, &config(2, 2)).unwrap();
        let bps = [ratio(0, 1), ratio(1, 2), ratio(1, 1), ratio(2, 1)];
        let (s, t) = (&bps[s], &bps[(s + len).min(3)]);
        prop_assume!(s < t);
        let g = model.dense_metric().unwrap();
        for i in 0..2 {
            let op = model.levy_increment(i, s, t).unwrap();
            prop_assert!(op.self_adjoint);
            let m = model.dense_matrix(&op).unwrap();
            prop_assert_eq!(mat_mul(&g, &m), mat_mul(&transpose(&m), &g));
        }
    }
}

use freeprob::nc::{catalan, enumerate_nc, is_noncrossing, mobius, NcPartition};
use proptest::prelude::*;

#[test]
fn enumeration_sizes_match_catalan() {
    let mut c = 1u64;
    for n in 1..=12u64 {
        c = c * 2 * (2 * n - 1) / (n + 1);
        assert_eq!(enumerate_nc(n as usize).unwrap().len() as u64, c, "n = {}", n);
        assert_eq!(catalan(n as usize), c);
    }
}

#[test]
fn enumerated_partitions_are_noncrossing() {
    for n in 1..=9 {
        for p in enumerate_nc(n).unwrap() {
            assert!(is_noncrossing(n, &p.blocks()).unwrap(), "{}", p);
        }
    }
}

#[test]
fn refinement_is_a_partial_order() {
    for n in 1..=5 {
        let parts = enumerate_nc(n).unwrap();
        let le: Vec<Vec<bool>> = parts.iter().map(|p| parts.iter().map(|q| p.leq(q).unwrap()).collect()).collect();
        for i in 0..parts.len() {
            assert!(le[i][i]);
            for j in 0..parts.len() {
                if i != j {
                    assert!(!(le[i][j] && le[j][i]), "{} and {}", parts[i], parts[j]);
                }
                for k in 0..parts.len() {
                    if le[i][j] && le[j][k] {
                        assert!(le[i][k]);
                    }
                }
            }
        }
    }
}

#[test]
fn join_is_the_least_upper_bound() {
    for n in 1..=5 {
        let parts = enumerate_nc(n).unwrap();
        for a in &parts {
            for b in &parts {
                let j = a.join(b).unwrap();
                assert!(a.leq(&j).unwrap() && b.leq(&j).unwrap());
                for u in &parts {
                    if a.leq(u).unwrap() && b.leq(u).unwrap() {
                        assert!(j.leq(u).unwrap(), "join({}, {}) = {} not below {}", a, b, j, u);
                    }
                }
            }
        }
    }
}

#[test]
fn mobius_convolution_over_every_interval() {
    for n in 1..=6 {
        let parts = enumerate_nc(n).unwrap();
        for p in &parts {
            for s in parts.iter().filter(|s| p.leq(s).unwrap()) {
                let total: i64 = parts
                    .iter()
                    .filter(|r| p.leq(r).unwrap() && r.leq(s).unwrap())
                    .map(|r| mobius(p, r).unwrap().0)
                    .sum();
                assert_eq!(total, i64::from(p == s), "[{}, {}]", p, s);
            }
        }
    }
}

#[test]
fn mobius_to_top_is_signed_catalan() {
    for n in 1..=8 {
        let mu = mobius(&NcPartition::bottom(n), &NcPartition::top(n)).unwrap().0;
        let sign = if n % 2 == 1 { 1 } else { -1 };
        assert_eq!(mu, sign * catalan(n - 1) as i64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_satisfies_its_defining_recursion(n in 2usize..=7, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let parts = enumerate_nc(n).unwrap();
        let (a, b) = (&parts[i.index(parts.len())], &parts[j.index(parts.len())]);
        let (lo, hi) = if a.leq(b).unwrap() { (a, b) } else if b.leq(a).unwrap() { (b, a) } else { return Ok(()) };
        let below: i64 = parts
            .iter()
            .filter(|r| lo.leq(r).unwrap() && r.leq(hi).unwrap() && *r != hi)
            .map(|r| mobius(lo, r).unwrap().0)
            .sum();
        let expected = if lo == hi { 1 } else { -below };
        prop_assert_eq!(mobius(lo, hi).unwrap().0, expected);
    }

    #[test]
    fn join_is_commutative_and_idempotent(n in 1usize..=8, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let parts = enumerate_nc(n).unwrap();
        let (a, b) = (&parts[i.index(parts.len())], &parts[j.index(parts.len())]);
        prop_assert_eq!(a.join(b).unwrap(), b.join(a).unwrap());
        prop_assert_eq!(&a.join(a).unwrap(), a);
    }
}

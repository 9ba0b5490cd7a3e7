mod common;

use freeprob::dsl::{parse, run, DslError};
use freeprob::scalar::ratio;
use freeprob::Rational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRELUDE: &str = "let a = semicircle(r=2)\nlet b = free_poisson(lambda=2, alpha=1/2)\nfree(a, b)\n";

fn poly(rng: &mut ChaCha8Rng, depth: usize) -> String {
    match if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) } {
        0 => "a".into(),
        1 => "b".into(),
        2 => format!("{}/{}", rng.gen_range(0..5), rng.gen_range(1..4)),
        3 => format!("({} + {})", poly(rng, depth - 1), poly(rng, depth - 1)),
        4 => format!("({} - {})", poly(rng, depth - 1), poly(rng, depth - 1)),
        _ => format!("{} * {}", poly(rng, depth - 1), poly(rng, depth - 1)),
    }
}

fn phi(expr: &str) -> Rational {
    let out = run(&format!("{}phi({})\n", PRELUDE, expr), 8).unwrap_or_else(|e| panic!("{}: {}", expr, e));
    out[0].scalar().unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_reaches_a_fixpoint(seed in any::<u64>()) {
        let program = common::program(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let text = program.to_string();
        let reparsed = parse(&text).unwrap();
        prop_assert_eq!(&reparsed, &program);
        prop_assert_eq!(reparsed.to_string(), text);
    }

    #[test]
    fn phi_is_linear(seed in any::<u64>(), c in -4i64..=4) {
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (poly(rng, 2), poly(rng, 2));
        prop_assert_eq!(phi(&format!("{} + {}", p, q)), phi(&p) + phi(&q));
        prop_assert_eq!(phi(&format!("{} * ({})", c, p)), ratio(c, 1) * phi(&p));
    }

    #[test]
    fn syntax_errors_point_inside_the_text(seed in any::<u64>(), cut in any::<prop::sample::Index>()) {
        let text = common::program(&mut ChaCha8Rng::seed_from_u64(seed), 4).to_string();
        let chars: Vec<char> = text.chars().collect();
        let mut broken: String = chars[..cut.index(chars.len())].iter().collect();
        broken.push_str(" = )\n");
        if let Err(DslError::Syntax(e)) = run(&broken, 4) {
            let lines: Vec<&str> = broken.lines().collect();
            prop_assert!(e.line >= 1 && e.line <= lines.len());
            prop_assert!(e.column >= 1 && e.column <= lines[e.line - 1].chars().count() + 1);
        }
    }
}

#[test]
fn free_variables_have_vanishing_mixed_cumulants() {
    let out = run(&format!("{}kappa(a, b)\nkappa(a, a, b, b)\nkappa(b, b, b)\n", PRELUDE), 6).unwrap();
    let values: Vec<Rational> = out.iter().map(|r| r.scalar().unwrap().clone()).collect();
    assert_eq!(values, vec![ratio(0, 1), ratio(0, 1), ratio(1, 4)]);
}

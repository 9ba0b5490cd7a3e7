#![allow(dead_code)]

use freeprob::dsl::{Arg, Expr, Program, QueryKind, Stmt, Value};
use freeprob::{MomentFunctional, Rational};
use num_bigint::BigInt;
use rand::Rng;

const NAMES: [&str; 6] = ["a", "b", "s", "x1", "p2", "gamma"];
const CTORS: [&str; 4] = ["semicircle", "free_poisson", "bernoulli", "custom"];

pub fn rational(rng: &mut impl Rng, signed: bool) -> Rational {
    let n = rng.gen_range(if signed { -20 } else { 0 }..=20);
    let d = rng.gen_range(1..=6);
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn name(rng: &mut impl Rng) -> String {
    NAMES[rng.gen_range(0..NAMES.len())].to_string()
}

fn names(rng: &mut impl Rng, max: usize) -> Vec<String> {
    (0..rng.gen_range(1..=max)).map(|_| name(rng)).collect()
}

pub fn value(rng: &mut impl Rng, depth: usize) -> Value {
    match rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
        0 => Value::Num(rational(rng, true)),
        1 => Value::Ident(name(rng)),
        _ => Value::List((0..rng.gen_range(0..=3)).map(|_| value(rng, depth - 1)).collect()),
    }
}

pub fn expr(rng: &mut impl Rng, depth: usize) -> Expr {
    let pick = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
    let sub = |rng: &mut _| Box::new(expr(rng, depth.saturating_sub(1)));
    match pick {
        0 => Expr::Num(rational(rng, false)),
        1 => Expr::Var(name(rng)),
        2 => Expr::Neg(sub(rng)),
        3 => Expr::Add(sub(rng), sub(rng)),
        4 => Expr::Sub(sub(rng), sub(rng)),
        _ => Expr::Mul(sub(rng), sub(rng)),
    }
}

fn args(rng: &mut impl Rng, max: usize) -> Vec<Arg> {
    (0..rng.gen_range(0..=max)).map(|_| Arg { name: name(rng), value: value(rng, 2) }).collect()
}

pub fn statement(rng: &mut impl Rng) -> Stmt {
    match rng.gen_range(0..3) {
        0 => Stmt::Let { names: names(rng, 3), ctor: CTORS[rng.gen_range(0..CTORS.len())].into(), args: args(rng, 3) },
        1 => Stmt::Free(names(rng, 3)),
        _ => Stmt::Query {
            kind: QueryKind::ALL[rng.gen_range(0..QueryKind::ALL.len())],
            args: (0..rng.gen_range(0..=3)).map(|_| expr(rng, 3)).collect(),
            options: args(rng, 2),
        },
    }
}

/// A random well-formed program of up to `max` statements.
pub fn program(rng: &mut impl Rng, max: usize) -> Program {
    Program::new((0..rng.gen_range(1..=max)).map(|_| statement(rng)).collect())
}

/// Random two-variable moment table with small rational entries.
pub fn moment_table(rng: &mut impl Rng, order: usize) -> MomentFunctional {
    MomentFunctional::from_fn(vec!["x".into(), "y".into()], order, |_| rational(rng, true)).unwrap()
}

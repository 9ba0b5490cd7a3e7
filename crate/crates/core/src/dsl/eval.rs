//! Session state and statement evaluation.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::ast::{Arg, Expr, Program, QueryKind, Stmt, Value};
use super::DslError;
use crate::cumulant::{moments_to_cumulants, CumulantFunctional, MomentFunctional};
use crate::error::{bail, Error, Result};
use crate::fock::{verify_levy_axioms, FockConfig, FockModel, LevyReport};
use crate::freeness::FreeProductLaw;
use crate::infdiv::{check_infdiv, InfDivReport};
use crate::limits::{approximation_report, ConvergenceReport};
use crate::models::{self, CovarianceMatrix};
use crate::nc::{mobius_to_top, nc_cached, DEFAULT_ORDER_CAP};
use crate::poly::NcPolynomial;
use crate::scalar::{format_rational, rat, serialize_rational, Rational};
use crate::word::Word;

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub word: String,
    pub value: String,
}

/// The value a query produces.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Output {
    Scalar {
        #[serde(serialize_with = "serialize_rational")]
        value: Rational,
    },
    Table {
        rows: Vec<TableRow>,
    },
    Infdiv {
        report: InfDivReport,
    },
    Levy {
        report: LevyReport,
    },
    Limit {
        report: ConvergenceReport,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryResult {
    pub query: String,
    pub line: usize,
    #[serde(flatten)]
    pub output: Output,
}

impl QueryResult {
    pub fn scalar(&self) -> Option<&Rational> {
        match &self.output {
            Output::Scalar { value } => Some(value),
            _ => None,
        }
    }
}

impl fmt::Display for QueryResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.output {
            Output::Scalar { value } => writeln!(f, "{} = {}", self.query, format_rational(value)),
            Output::Table { rows } => {
                writeln!(f, "{}", self.query)?;
                let lines: Vec<Vec<String>> =
                    rows.iter().map(|r| vec![format!("  {}", r.word), r.value.clone()]).collect();
                write!(f, "{}", crate::limits::align(&lines))
            }
            Output::Infdiv { report } => write!(f, "{}\n{}", self.query, report.to_text()),
            Output::Levy { report } => write!(f, "{}\n{}", self.query, report.to_text()),
            Output::Limit { report } => write!(f, "{}\n{}", self.query, report.to_text()),
        }
    }
}

struct Var {
    name: String,
    family: usize,
    local: usize,
}

/// Bindings, freeness groups and the order cap of one evaluation run.
pub struct Session {
    order: usize,
    families: Vec<CumulantFunctional>,
    vars: Vec<Var>,
    parent: Vec<usize>,
}

fn check_args(args: &[Arg], allowed: &[&str]) -> Result<()> {
    for (i, a) in args.iter().enumerate() {
        if !allowed.contains(&a.name.as_str()) {
            bail!(Validation, "unknown argument `{}`; expected one of {}", a.name, allowed.join(", "));
        }
        if args[..i].iter().any(|b| b.name == a.name) {
            bail!(Validation, "argument `{}` given twice", a.name);
        }
    }
    Ok(())
}

fn arg<'a>(args: &'a [Arg], name: &str) -> Option<&'a Value> {
    args.iter().find(|a| a.name == name).map(|a| &a.value)
}

fn num(args: &[Arg], name: &str, default: Option<Rational>) -> Result<Rational> {
    match (arg(args, name), default) {
        (Some(Value::Num(r)), _) => Ok(r.clone()),
        (Some(_), _) => bail!(Validation, "argument `{}` must be a number", name),
        (None, Some(d)) => Ok(d),
        (None, None) => bail!(Validation, "missing argument `{}`", name),
    }
}

fn small(args: &[Arg], name: &str, default: usize) -> Result<usize> {
    let r = num(args, name, Some(rat(default as i64)))?;
    match (r.is_integer(), usize::try_from(r.to_integer())) {
        (true, Ok(v)) => Ok(v),
        _ => bail!(Validation, "argument `{}` must be a nonnegative integer", name),
    }
}

fn idents(value: &Value) -> Result<Vec<String>> {
    match value {
        Value::Ident(s) => Ok(vec![s.clone()]),
        Value::List(items) => items.iter().map(|v| match v {
            Value::Ident(s) => Ok(s.clone()),
            _ => bail!(Validation, "expected a list of variables"),
        }).collect(),
        Value::Num(_) => bail!(Validation, "expected a variable or a list of variables"),
    }
}

fn matrix(value: &Value) -> Result<Vec<Vec<Rational>>> {
    let Value::List(rows) = value else { bail!(Validation, "expected a matrix [[..], ..]") };
    rows.iter()
        .map(|row| match row {
            Value::List(cells) => cells
                .iter()
                .map(|c| match c {
                    Value::Num(r) => Ok(r.clone()),
                    _ => bail!(Validation, "matrix entries must be numbers"),
                })
                .collect(),
            _ => bail!(Validation, "expected a matrix [[..], ..]"),
        })
        .collect()
}

impl Session {
    pub fn new(order: usize) -> Self {
        Session { order, families: vec![], vars: vec![], parent: vec![] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Evaluates statements in order, stopping at the first error.
    pub fn run(&mut self, program: &Program) -> Result<Vec<QueryResult>, DslError> {
        let mut out = vec![];
        for (i, stmt) in program.statements.iter().enumerate() {
            let span = program.spans.get(i).copied().unwrap_or_default();
            match self.execute(stmt) {
                Ok(Some(output)) => out.push(QueryResult { query: stmt.to_string(), line: span.line, output }),
                Ok(None) => {}
                Err(error) => return Err(DslError::Eval { line: span.line, column: span.column, error }),
            }
        }
        Ok(out)
    }

    pub fn execute(&mut self, stmt: &Stmt) -> Result<Option<Output>> {
        match stmt {
            Stmt::Let { names, ctor, args } => {
                self.bind(names, ctor, args)?;
                Ok(None)
            }
            Stmt::Free(names) => {
                self.assert_free(names)?;
                Ok(None)
            }
            Stmt::Query { kind, args, options } => self.query(*kind, args, options).map(Some),
        }
    }

    fn find(&self, mut f: usize) -> usize {
        while self.parent[f] != f {
            f = self.parent[f];
        }
        f
    }

    fn var(&self, name: &str) -> Result<usize> {
        match self.vars.iter().position(|v| v.name == name) {
            Some(i) => Ok(i),
            None => bail!(Validation, "unbound identifier `{}`", name),
        }
    }

    fn bind(&mut self, names: &[String], ctor: &str, args: &[Arg]) -> Result<()> {
        for (i, n) in names.iter().enumerate() {
            if self.vars.iter().any(|v| &v.name == n) || names[..i].contains(n) {
                bail!(Validation, "`{}` is already bound", n);
            }
        }
        let d = self.order;
        let cf = match ctor {
            "semicircle" => {
                check_args(args, &["r"])?;
                models::semicircle(&num(args, "r", Some(rat(2)))?, d)?
            }
            "semicircle_family" => {
                check_args(args, &["cov"])?;
                let Some(cov) = arg(args, "cov") else { bail!(Validation, "missing argument `cov`") };
                models::semicircle_family(&CovarianceMatrix::new(matrix(cov)?)?, d)?
            }
            "free_poisson" => {
                check_args(args, &["lambda", "alpha"])?;
                models::free_poisson(&num(args, "lambda", None)?, &num(args, "alpha", Some(rat(1)))?, d)?
            }
            "compound_free_poisson" => {
                check_args(args, &["lambda", "base"])?;
                let Some(base) = arg(args, "base") else { bail!(Validation, "missing argument `base`") };
                let base = self.joint_moments(&idents(base)?, d)?;
                models::compound_free_poisson(&num(args, "lambda", None)?, &base, d)?
            }
            "projection" => {
                check_args(args, &["t"])?;
                moments_to_cumulants(&models::projection_functional(&num(args, "t", None)?, d)?)
            }
            "bernoulli" => {
                check_args(args, &["t", "alpha", "beta"])?;
                let (t, a, b) = (num(args, "t", None)?, num(args, "alpha", Some(rat(1)))?, num(args, "beta", Some(rat(0)))?);
                moments_to_cumulants(&models::bernoulli(&t, &a, &b, d)?)
            }
            "point_mass" => {
                check_args(args, &["alpha"])?;
                moments_to_cumulants(&models::point_mass(&num(args, "alpha", None)?, d)?)
            }
            other => bail!(
                Validation,
                "unknown constructor `{}`; expected semicircle, semicircle_family, free_poisson, \
                 compound_free_poisson, projection, bernoulli or point_mass",
                other
            ),
        };
        if cf.k() != names.len() {
            bail!(Validation, "`{}` defines {} variables but {} names were given", ctor, cf.k(), names.len());
        }
        let family = self.families.len();
        self.families.push(cf.renamed(names.to_vec())?);
        self.parent.push(family);
        for (local, name) in names.iter().enumerate() {
            self.vars.push(Var { name: name.clone(), family, local });
        }
        Ok(())
    }

    fn assert_free(&mut self, names: &[String]) -> Result<()> {
        let fams: Vec<usize> = names.iter().map(|n| self.var(n).map(|v| self.vars[v].family)).collect::<Result<_>>()?;
        for (i, f) in fams.iter().enumerate() {
            if fams[..i].contains(f) {
                bail!(Validation, "`{}` and `{}` come from the same declaration", names[fams.iter().position(|g| g == f).unwrap()], names[i]);
            }
        }
        for f in &fams[1..] {
            let (a, b) = (self.find(fams[0]), self.find(*f));
            self.parent[b] = a;
        }
        Ok(())
    }

    /// The free product law of a group and the union letter of each family's first variable.
    fn group_law(&self, root: usize) -> Result<(FreeProductLaw, HashMap<usize, usize>)> {
        let members: Vec<usize> = (0..self.families.len()).filter(|&f| self.find(f) == root).collect();
        let mut offsets = HashMap::new();
        let mut offset = 0;
        for &f in &members {
            offsets.insert(f, offset);
            offset += self.families[f].k();
        }
        let law = FreeProductLaw::new(members.iter().map(|&f| self.families[f].clone()).collect())?;
        Ok((law, offsets))
    }

    /// The law shared by `vars` and their letters in it.
    fn law_for(&self, vars: &[usize]) -> Result<(FreeProductLaw, Vec<usize>)> {
        let Some(&first) = vars.first() else { bail!(Validation, "no variables given") };
        let root = self.find(self.vars[first].family);
        if let Some(&other) = vars.iter().find(|&&v| self.find(self.vars[v].family) != root) {
            bail!(
                Validation,
                "`{}` and `{}` have no declared joint distribution; assert free({}, {}) first",
                self.vars[first].name,
                self.vars[other].name,
                self.vars[first].name,
                self.vars[other].name
            );
        }
        let (law, offsets) = self.group_law(root)?;
        let letters = vars.iter().map(|&v| offsets[&self.vars[v].family] + self.vars[v].local).collect();
        Ok((law, letters))
    }

    fn joint_moments(&self, names: &[String], order: usize) -> Result<MomentFunctional> {
        let vars: Vec<usize> = names.iter().map(|n| self.var(n)).collect::<Result<_>>()?;
        let (law, letters) = self.law_for(&vars)?;
        let mut err = None;
        let mf = MomentFunctional::from_fn(names.to_vec(), order, |w| {
            let mapped: Vec<usize> = w.letters().iter().map(|&l| letters[l]).collect();
            law.moment(&mapped).unwrap_or_else(|e| {
                err.get_or_insert(e);
                Rational::zero()
            })
        })?;
        err.map_or(Ok(mf), Err)
    }

    fn joint_cumulants(&self, names: &[String], order: usize) -> Result<CumulantFunctional> {
        if order > self.order {
            bail!(Validation, "order {} exceeds the session order cap {}", order, self.order);
        }
        let vars: Vec<usize> = names.iter().map(|n| self.var(n)).collect::<Result<_>>()?;
        let (law, letters) = self.law_for(&vars)?;
        CumulantFunctional::from_fn(names.to_vec(), order, |w| {
            let mapped: Vec<usize> = w.letters().iter().map(|&l| letters[l]).collect();
            law.cumulant(&mapped).unwrap()
        })
    }

    fn polynomial(&self, e: &Expr) -> Result<NcPolynomial> {
        Ok(match e {
            Expr::Num(r) => NcPolynomial::constant(r.clone()),
            Expr::Var(v) => NcPolynomial::letter(self.var(v)?),
            Expr::Neg(a) => -&self.polynomial(a)?,
            Expr::Add(a, b) => &self.polynomial(a)? + &self.polynomial(b)?,
            Expr::Sub(a, b) => &self.polynomial(a)? - &self.polynomial(b)?,
            Expr::Mul(a, b) => &self.polynomial(a)? * &self.polynomial(b)?,
        })
    }

    /// Linear extension of the joint distribution to a polynomial.
    fn phi(&self, p: &NcPolynomial, laws: &mut HashMap<usize, (FreeProductLaw, HashMap<usize, usize>)>) -> Result<Rational> {
        if p.degree() > self.order {
            bail!(Validation, "order overflow: degree {} exceeds the session order cap {}", p.degree(), self.order);
        }
        p.evaluate(&mut |w: &Word| {
            let first = w.letters()[0];
            let root = self.find(self.vars[first].family);
            if !laws.contains_key(&root) {
                let vars: Vec<usize> = w.letters().to_vec();
                self.law_for(&vars)?;
                laws.insert(root, self.group_law(root)?);
            }
            let (law, offsets) = &laws[&root];
            let mut mapped = Vec::with_capacity(w.len());
            for &v in w.letters() {
                if self.find(self.vars[v].family) != root {
                    self.law_for(&[first, v])?;
                }
                mapped.push(offsets[&self.vars[v].family] + self.vars[v].local);
            }
            law.moment(&mapped)
        })
    }

    fn ident_args(&self, args: &[Expr]) -> Result<Vec<String>> {
        if args.is_empty() {
            bail!(Validation, "expected at least one variable");
        }
        args.iter()
            .map(|e| match e {
                Expr::Var(v) => {
                    self.var(v)?;
                    Ok(v.clone())
                }
                _ => bail!(Validation, "expected variable names, got `{}`", e),
            })
            .collect()
    }

    fn query(&self, kind: QueryKind, args: &[Expr], options: &[Arg]) -> Result<Output> {
        let mut laws = HashMap::new();
        match kind {
            QueryKind::Phi => {
                check_args(options, &[])?;
                if args.len() != 1 {
                    bail!(Validation, "phi takes exactly one expression");
                }
                let p = self.polynomial(&args[0])?;
                Ok(Output::Scalar { value: self.phi(&p, &mut laws)? })
            }
            QueryKind::Kappa => {
                check_args(options, &[])?;
                let n = args.len();
                if n == 0 || n > DEFAULT_ORDER_CAP {
                    bail!(Validation, "kappa takes between 1 and {} arguments", DEFAULT_ORDER_CAP);
                }
                let polys: Vec<NcPolynomial> = args.iter().map(|e| self.polynomial(e)).collect::<Result<_>>()?;
                let total: usize = polys.iter().map(NcPolynomial::degree).sum();
                if total > self.order {
                    bail!(Validation, "order overflow: total degree {} exceeds the session order cap {}", total, self.order);
                }
                let mut block_values: HashMap<Vec<usize>, Rational> = HashMap::new();
                let mut value = Rational::zero();
                for (pi, mu) in nc_cached(n).iter().zip(mobius_to_top(n).iter()) {
                    let mut prod = rat(*mu);
                    for block in pi.blocks() {
                        if prod.is_zero() {
                            break;
                        }
                        let v = match block_values.get(&block) {
                            Some(v) => v.clone(),
                            None => {
                                let p = block.iter().fold(NcPolynomial::constant(Rational::one()), |acc, &j| &acc * &polys[j]);
                                let v = self.phi(&p, &mut laws)?;
                                block_values.insert(block.clone(), v.clone());
                                v
                            }
                        };
                        prod *= v;
                    }
                    value += prod;
                }
                Ok(Output::Scalar { value })
            }
            QueryKind::Moments => {
                check_args(options, &["order"])?;
                let names = self.ident_args(args)?;
                let order = small(options, "order", self.order)?;
                if order > self.order {
                    bail!(Validation, "order {} exceeds the session order cap {}", order, self.order);
                }
                let mf = self.joint_moments(&names, order)?;
                let rows = mf.iter().map(|(w, v)| TableRow { word: w.render(&names), value: format_rational(v) }).collect();
                Ok(Output::Table { rows })
            }
            QueryKind::Infdiv => {
                check_args(options, &["degree"])?;
                let names = self.ident_args(args)?;
                let degree = small(options, "degree", self.order / 2)?;
                let cf = self.joint_cumulants(&names, 2 * degree)?;
                Ok(Output::Infdiv { report: check_infdiv(&cf, names.len(), degree, &Rational::zero())? })
            }
            QueryKind::LevyCheck => {
                check_args(options, &["order"])?;
                let names = self.ident_args(args)?;
                let n = small(options, "order", (self.order / 2).min(4))?;
                let cf_order = if 2 * n < self.order { 2 * n + 1 } else { 2 * n };
                let cf = self.joint_cumulants(&names, cf_order)?.to_f64();
                let model = FockModel::build(&cf, names.len(), &FockConfig::new(n, n))?;
                Ok(Output::Levy { report: verify_levy_axioms(&model, n, 1e-9)? })
            }
            QueryKind::Limit => {
                check_args(options, &["j", "order"])?;
                let names = self.ident_args(args)?;
                let order = small(options, "order", self.order.min(6))?;
                let js: Vec<u64> = match arg(options, "j") {
                    None => vec![1, 10, 100, 1000],
                    Some(Value::List(items)) => items
                        .iter()
                        .map(|v| match v {
                            Value::Num(r) if r.is_integer() && *r >= Rational::one() => {
                                u64::try_from(r.to_integer()).map_err(|_| Error::Validation("j is too large".into()))
                            }
                            _ => bail!(Validation, "j must be a list of positive integers"),
                        })
                        .collect::<Result<_>>()?,
                    Some(_) => bail!(Validation, "j must be a list of positive integers"),
                };
                let cf = self.joint_cumulants(&names, order)?;
                Ok(Output::Limit { report: approximation_report(&cf, &js, order)? })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::run;
    use crate::scalar::rat;

    fn value(src: &str) -> crate::scalar::Rational {
        run(src, 8).unwrap().last().unwrap().scalar().unwrap().clone()
    }

    #[test]
    fn standard_semicircle_second_moment() {
        assert_eq!(value("let s = semicircle(r=2); phi(s*s)"), rat(1));
    }

    #[test]
    fn free_poisson_variance() {
        assert_eq!(value("let p = free_poisson(lambda=1, alpha=1)\nkappa(p, p)"), rat(1));
    }

    #[test]
    fn free_semicircles_alternating_moment() {
        assert_eq!(value("let a = semicircle(r=2); let b = semicircle(r=2); free(a, b); phi(a*b*a*b)"), rat(0));
        assert_eq!(value("let a = semicircle(r=2); let b = semicircle(r=2); free(a, b); phi(a*a*b*b)"), rat(1));
    }

    #[test]
    fn errors_carry_positions() {
        let e = run("let s = semicircle(r=2)\nphi(t*s)", 8).unwrap_err();
        assert!(matches!(e, super::DslError::Eval { line: 2, column: 1, .. }), "{:?}", e);
        let e = run("let a = semicircle(); let b = semicircle()\nphi(a*b)", 8).unwrap_err();
        assert!(e.to_string().contains("no declared joint distribution"));
        let e = run("let s = semicircle()\nphi(s s s s s)", 4).unwrap_err();
        assert!(e.to_string().contains("order overflow"));
    }

    #[test]
    fn kappa_of_polynomials() {
        // κ₂(a+b, a+b) = κ₂(a) + κ₂(b) for free a, b.
        let v = value("let a = semicircle(r=2); let b = free_poisson(lambda=2, alpha=3); free(a, b); kappa(a + b, a + b)");
        assert_eq!(v, rat(1 + 18));
        let v = value("let s1, s2 = semicircle_family(cov=[[2, 1], [1, 3]]); kappa(s1, 2 s2)");
        assert_eq!(v, rat(2));
    }
}

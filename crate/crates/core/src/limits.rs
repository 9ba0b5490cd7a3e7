//! Finite-N triangular arrays, their Poisson-type limits, convergence-rate
//! reports, semigroup dilation, and compound-Poisson approximation.
//!
//! Everything is evaluated exactly at finite `N`; for the canonical projection
//! models the limit `N·φ_N(p-word)` is known in closed form, so no
//! subsequence or ultrafilter is ever needed.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cumulant::{cumulants_to_moments, moments_to_cumulants, CumulantFunctional, MomentFunctional};
use crate::error::{bail, Result};
use crate::infdiv::{is_psd, moment_gram};
use crate::models::{compound_free_poisson, projection_family, PoissonSpec, ProjectionModel};
use crate::nc::{mobius_to_top, nc_cached};
use crate::scalar::{
    format_rational, rat, serialize_opt_rational, serialize_rational, serialize_rationals, Rational, Scalar,
};
use crate::word::Word;

/// Cumulants of the row sum `S_N` of `N` free copies of `row`: `N·κ(row)`.
pub fn array_cumulants(row: &MomentFunctional, rows: u64, order: usize) -> Result<CumulantFunctional> {
    if rows == 0 {
        bail!(Validation, "N must be positive");
    }
    if order > row.max_order() {
        bail!(Validation, "order {} exceeds the row order {}", order, row.max_order());
    }
    Ok(moments_to_cumulants(&row.truncate(order)).scaled(&rat(rows as i64)))
}

/// The semigroup marginal `κ ↦ t·κ`.
pub fn dilate<S: Scalar>(cf: &CumulantFunctional<S>, t: &S) -> Result<CumulantFunctional<S>> {
    if *t < S::zero() {
        bail!(Validation, "dilation parameter must be nonnegative");
    }
    Ok(cf.scaled(t))
}

/// One word of a convergence report.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub word: String,
    #[serde(serialize_with = "serialize_rationals")]
    pub values: Vec<Rational>,
    #[serde(serialize_with = "serialize_rational")]
    pub target: Rational,
    #[serde(serialize_with = "serialize_rationals")]
    pub errors: Vec<Rational>,
    /// `K(w)` with `error ≤ K(w)/N`, when an a-priori bound is known.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub bound: Option<Rational>,
    /// Mean log-ratio slope of successive nonzero errors.
    pub exponent: Option<f64>,
}

/// Word-wise comparison of a sequence of cumulant tables against a target.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// Name of the sequence parameter (`N` or `j`).
    pub parameter: String,
    pub schedule: Vec<u64>,
    pub order: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Largest error over all words, one entry per schedule step.
    pub fn max_errors(&self) -> Vec<Rational> {
        (0..self.schedule.len())
            .map(|i| self.rows.iter().map(|r| r.errors[i].clone()).max().unwrap_or_else(Rational::zero))
            .collect()
    }

    /// Whether every error obeys its bound `K(w)/N`.
    pub fn within_bounds(&self) -> bool {
        self.rows.iter().all(|r| match &r.bound {
            Some(k) => r.errors.iter().zip(&self.schedule).all(|(e, &n)| *e <= k / rat(n as i64)),
            None => true,
        })
    }

    pub fn row(&self, word: &str) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.word == word)
    }

    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let mut header = vec!["word".to_string()];
        header.extend(self.schedule.iter().map(|n| format!("err {}={}", self.parameter, n)));
        header.push("target".into());
        header.push("exponent".into());
        let mut lines = vec![header];
        for r in &self.rows {
            let mut line = vec![r.word.clone()];
            line.extend(r.errors.iter().map(format_rational));
            line.push(format_rational(&r.target));
            line.push(r.exponent.map_or("-".into(), |e| format!("{:.3}", e)));
            lines.push(line);
        }
        align(&lines)
    }
}

/// Left-aligned columns separated by two spaces.
pub fn align(lines: &[Vec<String>]) -> String {
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| lines.iter().filter_map(|l| l.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for l in lines {
        let cells: Vec<String> = l.iter().enumerate().map(|(c, s)| format!("{:<w$}", s, w = widths[c])).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn fit_exponent(schedule: &[u64], errors: &[Rational]) -> Option<f64> {
    let slopes: Vec<f64> = schedule
        .windows(2)
        .zip(errors.windows(2))
        .filter(|(n, e)| n[0] != n[1] && !e[0].is_zero() && !e[1].is_zero())
        .map(|(n, e)| (e[0].to_f64() / e[1].to_f64()).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    if slopes.is_empty() {
        None
    } else {
        Some(slopes.iter().sum::<f64>() / slopes.len() as f64)
    }
}

fn build_report(
    parameter: &str,
    schedule: &[u64],
    names: &[String],
    order: usize,
    values: &[CumulantFunctional],
    target: &dyn Fn(&Word) -> Rational,
    bound: &dyn Fn(&Word) -> Option<Rational>,
) -> ConvergenceReport {
    let k = names.len();
    let rows = crate::word::words_up_to(k, order)
        .map(|w| {
            let vals: Vec<Rational> = values.iter().map(|cf| cf.cumulant(&w.0).unwrap()).collect();
            let t = target(&w);
            let errors: Vec<Rational> = vals.iter().map(|v| (v - &t).abs()).collect();
            ConvergenceRow {
                word: w.render(names),
                exponent: fit_exponent(schedule, &errors),
                values: vals,
                target: t,
                errors,
                bound: bound(&w),
            }
        })
        .collect();
    ConvergenceReport { parameter: parameter.into(), schedule: schedule.to_vec(), order, rows }
}

/// `lim N·ψ_N(p-word)` for the canonical projection models.
fn projection_limit(spec: &PoissonSpec, model: ProjectionModel, w: &Word) -> Rational {
    let l = w.letters();
    let pure = l.iter().all(|&x| x == l[0]);
    match model {
        ProjectionModel::Equal => spec.rates()[0].clone(),
        ProjectionModel::Orthogonal | ProjectionModel::Free if pure => spec.rates()[l[0]].clone(),
        _ => Rational::zero(),
    }
}

/// `Σ_{π≠1} |μ(π,1)| Π_V B(w_V)`: the non-leading part of the Möbius sum, with
/// `B` bounding `N·|φ_row|` on each block.
fn mobius_tail(w: &Word, block_bound: &dyn Fn(&Word) -> Rational) -> Rational {
    let n = w.len();
    let parts = nc_cached(n);
    let mu = mobius_to_top(n);
    let mut total = Rational::zero();
    for (p, m) in parts.iter().zip(mu.iter()) {
        if p.num_blocks() == 1 || *m == 0 {
            continue;
        }
        let prod = p.blocks().iter().fold(Rational::one(), |acc, b| acc * block_bound(&w.subword(b)));
        total += prod * rat(m.abs());
    }
    total
}

/// `Σ_{π∈NC(n), π≠1} Π_V C_V`, with `C_m = Σ_{σ∈NC(m)} |μ(σ,1)|` bounding
/// `|κ_m(p)| / φ(p)` for a projection.
fn free_mixed_constant(n: usize) -> Rational {
    let c: Vec<Rational> = (0..=n)
        .map(|m| if m == 0 { Rational::zero() } else { rat(mobius_to_top(m).iter().map(|x| x.abs()).sum()) })
        .collect();
    let parts = nc_cached(n);
    parts
        .iter()
        .filter(|p| p.num_blocks() > 1)
        .map(|p| p.blocks().iter().fold(Rational::one(), |acc, b| acc * &c[b.len()]))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Row moments `weight(w)·ψ_N(p-word)` of the elements `a_i ⊗ p⁽ⁱ⁾`.
pub fn tensor_row(weight: &MomentFunctional, projections: &MomentFunctional) -> Result<MomentFunctional> {
    if weight.k() != projections.k() {
        bail!(Structural, "{} base variables against {} projections", weight.k(), projections.k());
    }
    let order = weight.max_order().min(projections.max_order());
    MomentFunctional::from_fn(weight.alphabet().to_vec(), order, |w| {
        weight.moment(&w.0).unwrap() * projections.moment(&w.0).unwrap()
    })
}

fn check_schedule(spec: &PoissonSpec, model: ProjectionModel, schedule: &[u64]) -> Result<()> {
    let min = spec.min_rows(model);
    if let Some(&bad) = schedule.iter().find(|&&n| n < min) {
        bail!(Validation, "schedule entry N = {} is below the admissible minimum {}", bad, min);
    }
    Ok(())
}

fn projection_report(
    weight: &MomentFunctional,
    spec: &PoissonSpec,
    model: ProjectionModel,
    schedule: &[u64],
    order: usize,
) -> Result<ConvergenceReport> {
    if spec.len() != weight.k() {
        bail!(Validation, "{} rates for {} variables", spec.len(), weight.k());
    }
    if weight.max_order() < order {
        bail!(Validation, "base distribution has order {} < {}", weight.max_order(), order);
    }
    check_schedule(spec, model, schedule)?;
    let values: Vec<CumulantFunctional> = schedule
        .iter()
        .map(|&n| {
            let psi = projection_family(spec, model, n, order)?;
            array_cumulants(&tensor_row(weight, &psi)?, n, order)
        })
        .collect::<Result<_>>()?;
    let lmax = spec.sup_rate();
    let target = |w: &Word| weight.moment(&w.0).unwrap() * projection_limit(spec, model, w);
    let bound = |w: &Word| {
        let block = |u: &Word| &lmax * weight.moment(&u.0).unwrap().abs();
        let mut k = mobius_tail(w, &block);
        let l = w.letters();
        if model == ProjectionModel::Free && l.iter().any(|&x| x != l[0]) {
            k += weight.moment(&w.0).unwrap().abs() * &lmax * &lmax * free_mixed_constant(w.len());
        }
        Some(k)
    };
    Ok(build_report("N", schedule, weight.alphabet(), order, &values, &target, &bound))
}

/// One-dimensional free Poisson limit: `κ_m(S_N)` against `λα^m`.
pub fn poisson_limit_check(spec: &PoissonSpec, schedule: &[u64], order: usize) -> Result<ConvergenceReport> {
    if spec.len() != 1 {
        bail!(Validation, "the one-dimensional check takes a single rate");
    }
    multi_poisson_limit_check(spec, ProjectionModel::Equal, schedule, order)
}

/// Multidimensional free Poisson limit for `S_N⁽ⁱ⁾ = Σ_j α_i p_{j,N}⁽ⁱ⁾`.
pub fn multi_poisson_limit_check(
    spec: &PoissonSpec,
    model: ProjectionModel,
    schedule: &[u64],
    order: usize,
) -> Result<ConvergenceReport> {
    let weight = crate::models::scalar_family(spec.jumps(), order)?;
    projection_report(&weight, spec, model, schedule, order)
}

/// Compound limit: row elements `a_i ⊗ p⁽ⁱ⁾` under `φ ⊗ ψ_N`.
pub fn compound_limit_check(
    base: &MomentFunctional,
    spec: &PoissonSpec,
    model: ProjectionModel,
    schedule: &[u64],
    order: usize,
) -> Result<ConvergenceReport> {
    projection_report(base, spec, model, schedule, order)
}

/// Closed-form limit cumulants of the multidimensional free Poisson model.
pub fn multi_poisson_limit(spec: &PoissonSpec, model: ProjectionModel, order: usize) -> Result<CumulantFunctional> {
    let weight = crate::models::scalar_family(spec.jumps(), order)?;
    compound_limit(&weight, spec, model, order)
}

/// Closed-form limit cumulants `φ_base(w)·lim N·ψ_N(p-word)`.
pub fn compound_limit(
    base: &MomentFunctional,
    spec: &PoissonSpec,
    model: ProjectionModel,
    order: usize,
) -> Result<CumulantFunctional> {
    if spec.len() != base.k() {
        bail!(Validation, "{} rates for {} variables", spec.len(), base.k());
    }
    if model == ProjectionModel::Equal && spec.rates().iter().any(|r| r != &spec.rates()[0]) {
        bail!(Validation, "the equal model needs identical rates");
    }
    CumulantFunctional::from_fn(base.alphabet().to_vec(), order, |w| {
        base.moment(&w.0).unwrap() * projection_limit(spec, model, w)
    })
}

/// Compound free Poisson approximant of an infinitely divisible target.
#[derive(Debug, Clone)]
pub struct PoissonApproximation {
    pub j: u64,
    pub approximant: CumulantFunctional,
    /// `|κ_approx(w) − κ_target(w)|` per word.
    pub errors: Vec<(Word, Rational)>,
    /// Whether the moment form of `μ_{1/j}` is positive semidefinite; the
    /// construction proceeds formally either way.
    pub base_positive: bool,
}

impl PoissonApproximation {
    pub fn max_error(&self) -> Rational {
        self.errors.iter().map(|(_, e)| e.clone()).max().unwrap_or_else(Rational::zero)
    }
}

/// `κ_approx = j·φ_{1/j}` where `φ_{1/j}` has cumulants `κ_target / j`.
pub fn poisson_approximation(target: &CumulantFunctional, j: u64, order: usize) -> Result<PoissonApproximation> {
    if j == 0 {
        bail!(Validation, "j must be positive");
    }
    if order > target.max_order() {
        bail!(Validation, "order {} exceeds the target order {}", order, target.max_order());
    }
    let target = target.truncate(order);
    let jr = rat(j as i64);
    let base = cumulants_to_moments(&dilate(&target, &(Rational::one() / &jr))?);
    let approximant = compound_free_poisson(&jr, &base, order)?;
    let errors = approximant
        .iter()
        .map(|(w, v)| {
            let e = (v - target.cumulant(&w.0).unwrap()).abs();
            (w, e)
        })
        .collect();
    let gram = moment_gram(&base, base.k(), order / 2, true)?;
    let base_positive = is_psd(&gram, &Rational::zero())?.psd;
    Ok(PoissonApproximation { j, approximant, errors, base_positive })
}

/// Word-wise convergence of `sequence` to `target`.
pub fn sequence_limit_check(
    sequence: &[CumulantFunctional],
    target: &CumulantFunctional,
    order: usize,
) -> Result<ConvergenceReport> {
    let schedule: Vec<u64> = (1..=sequence.len() as u64).collect();
    sequence_report("index", &schedule, sequence, target, order)
}

fn sequence_report(
    parameter: &str,
    schedule: &[u64],
    sequence: &[CumulantFunctional],
    target: &CumulantFunctional,
    order: usize,
) -> Result<ConvergenceReport> {
    if sequence.is_empty() {
        return Ok(ConvergenceReport { parameter: parameter.into(), schedule: vec![], order, rows: vec![] });
    }
    if order > target.max_order() || sequence.iter().any(|c| order > c.max_order()) {
        bail!(Validation, "order {} exceeds a table order", order);
    }
    if sequence.iter().any(|c| c.alphabet() != target.alphabet()) {
        bail!(Structural, "sequence and target use different alphabets");
    }
    let trimmed: Vec<CumulantFunctional> = sequence.iter().map(|c| c.truncate(order)).collect();
    let target_fn = |w: &Word| target.cumulant(&w.0).unwrap();
    Ok(build_report(parameter, schedule, target.alphabet(), order, &trimmed, &target_fn, &|_| None))
}

/// Convergence of the compound Poisson approximants over a schedule of `j`.
pub fn approximation_report(target: &CumulantFunctional, js: &[u64], order: usize) -> Result<ConvergenceReport> {
    let seq: Vec<CumulantFunctional> =
        js.iter().map(|&j| poisson_approximation(target, j, order).map(|a| a.approximant)).collect::<Result<_>>()?;
    sequence_report("j", js, &seq, target, order)
}

//! Truncated full Fock space realisation of free Lévy processes.
//!
//! The one-particle space is `T ⊗ H`: `T` spans indicators of the elementary
//! intervals between time breakpoints and `H` is the polynomial algebra
//! modulo the kernel of the cumulant form. `H` is represented by a set of
//! basis monomials with their (non-orthonormal) Gram matrix as metric, so the
//! same code runs exactly over rationals and approximately over floats.
//!
//! Operators are kept in structured form (scalar, creation, annihilation and
//! gauge terms) and act level by level on Fock vectors; dense matrices are
//! only produced on request for small models.

use std::collections::HashMap;

use serde::Serialize;

use crate::cumulant::{cumulants_to_moments, moments_to_cumulants, CumulantFunctional, MomentFunctional};
use crate::error::{bail, Result};
use crate::freeness::check_cumulant_freeness;
use crate::infdiv::{gram_matrix, render_polynomial};
use crate::linalg::{self, Definiteness, Matrix};
use crate::nc::nc_cached;
use crate::scalar::{format_rational, ratio, Rational, Scalar};
use crate::word::{words_up_to, Word};

/// Which multiplication on the polynomial algebra drives the gauge term.
///
/// With right multiplication the vacuum state reproduces `κ(w)` for every
/// reversal-symmetric cumulant functional. Left multiplication yields the
/// cyclically rotated cumulant and agrees only for tracial functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplicationSide {
    #[default]
    Right,
    Left,
}

/// `{0, 1/8, 1/4, 1/2, 1, 2, 3}`: every interval the Lévy checks touch.
pub fn standard_breakpoints() -> Vec<Rational> {
    vec![ratio(0, 1), ratio(1, 8), ratio(1, 4), ratio(1, 2), ratio(1, 1), ratio(2, 1), ratio(3, 1)]
}

/// The polynomial algebra modulo the kernel of the cumulant form, truncated at
/// degree `d_H`.
#[derive(Debug, Clone)]
pub struct PolySpace<S> {
    k: usize,
    degree: usize,
    index: Vec<Word>,
    positions: HashMap<Word, usize>,
    /// Indices into `index` of the basis monomials.
    basis: Vec<usize>,
    /// Gram matrix of the basis monomials.
    metric: Matrix<S>,
    /// Basis coordinates of every monomial.
    coords: Vec<Vec<S>>,
    /// `mult[i][b'][b]`: coordinate `b'` of `X_b` multiplied by `X_i`.
    mult: Vec<Matrix<S>>,
    /// Whether degree `d_H + 1` products were projected (rather than dropped).
    top_projected: bool,
}

/// Builds `H`; refused with a negative-norm witness when the form is not positive.
pub fn build_poly_space<S: Scalar>(
    cf: &CumulantFunctional<S>,
    k: usize,
    degree: usize,
    tolerance: &S,
    side: MultiplicationSide,
) -> Result<PolySpace<S>> {
    if degree == 0 {
        bail!(Validation, "polynomial degree cap must be positive");
    }
    let gram = gram_matrix(cf, k, degree)?;
    if linalg::max_asymmetry(&gram.entries) > *tolerance {
        bail!(Validation, "cumulant form is not symmetric: κ(w) and κ(reverse w) differ");
    }
    // Lower degrees are pivoted first.
    let grades: Vec<usize> = gram.index.iter().map(Word::len).collect();
    let decomposition = linalg::graded_ldl(&gram.entries, tolerance, &grades)?;
    if let Definiteness::Negative { witness, value } = decomposition.outcome {
        bail!(
            Domain,
            "cumulant form is not positive: <P,P> = {} for P = {}",
            value,
            render_polynomial(&witness, &gram.index, cf.alphabet())
        );
    }
    let mut basis: Vec<usize> = decomposition.pivots.iter().map(|(i, _)| *i).collect();
    basis.sort_unstable();
    let index = gram.index;
    let positions: HashMap<Word, usize> = index.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let metric: Matrix<S> = basis.iter().map(|&a| basis.iter().map(|&b| gram.entries[a][b].clone()).collect()).collect();
    let project = |pairing: Vec<S>| -> Result<Vec<S>> {
        if basis.is_empty() {
            Ok(vec![])
        } else {
            linalg::solve(&metric, &pairing)
        }
    };
    let coords: Vec<Vec<S>> = (0..index.len())
        .map(|m| match basis.iter().position(|&b| b == m) {
            Some(p) => Ok((0..basis.len()).map(|q| if q == p { S::one() } else { S::zero() }).collect()),
            None => project(basis.iter().map(|&b| gram.entries[b][m].clone()).collect()),
        })
        .collect::<Result<_>>()?;
    let top_projected = cf.max_order() > 2 * degree;
    let mut mult = Vec::with_capacity(k);
    for i in 0..k {
        let mut columns = Vec::with_capacity(basis.len());
        for &b in &basis {
            let mut p = index[b].0.clone();
            match side {
                MultiplicationSide::Right => p.push(i),
                MultiplicationSide::Left => p.insert(0, i),
            }
            let col = if p.len() <= degree {
                coords[positions[&Word(p)]].clone()
            } else if top_projected {
                let pairing = basis
                    .iter()
                    .map(|&q| {
                        let mut letters = index[q].0.clone();
                        letters.extend(p.iter().rev());
                        cf.cumulant(&letters)
                    })
                    .collect::<Result<Vec<S>>>()?;
                project(pairing)?
            } else {
                vec![S::zero(); basis.len()]
            };
            columns.push(col);
        }
        mult.push(linalg::transpose(&columns));
        if basis.is_empty() {
            mult[i] = vec![];
        }
    }
    Ok(PolySpace { k, degree, index, positions, basis, metric, coords, mult, top_projected })
}

impl<S: Scalar> PolySpace<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_monomials(&self) -> Vec<&Word> {
        self.basis.iter().map(|&b| &self.index[b]).collect()
    }

    pub fn metric(&self) -> &Matrix<S> {
        &self.metric
    }

    /// Basis coordinates of a monomial of degree `1..=d_H`.
    pub fn coordinates(&self, w: &Word) -> Option<&[S]> {
        self.positions.get(w).map(|&p| self.coords[p].as_slice())
    }

    /// Coordinates of the generator `X_i`.
    pub fn letter(&self, i: usize) -> &[S] {
        self.coordinates(&Word(vec![i])).expect("degree cap is at least one")
    }

    pub fn multiplication(&self, i: usize) -> &Matrix<S> {
        &self.mult[i]
    }

    /// `⟨x, y⟩` for coordinate vectors.
    pub fn inner(&self, x: &[S], y: &[S]) -> S {
        let my = linalg::mat_vec(&self.metric, y);
        x.iter().zip(&my).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// Rows are an orthonormal basis of `H`, written over all monomials.
    pub fn orthonormal_coefficients(&self) -> Result<Matrix<f64>> {
        let m: Matrix<f64> = self.metric.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
        let linv = linalg::lower_inverse(&linalg::cholesky(&m)?);
        Ok(linv
            .iter()
            .map(|row| {
                let mut full = vec![0.0; self.index.len()];
                for (q, &b) in self.basis.iter().enumerate() {
                    full[b] = row[q];
                }
                full
            })
            .collect())
    }

    pub fn monomials(&self) -> &[Word] {
        &self.index
    }
}

/// Indicators of the elementary intervals between sorted breakpoints.
#[derive(Debug, Clone)]
pub struct TimeComponent<S> {
    breakpoints: Vec<Rational>,
    lengths: Vec<S>,
}

impl<S: Scalar> TimeComponent<S> {
    pub fn new(mut breakpoints: Vec<Rational>) -> Result<Self> {
        breakpoints.sort();
        breakpoints.dedup();
        if breakpoints.len() < 2 {
            bail!(Validation, "need at least two time breakpoints");
        }
        if breakpoints[0] < Rational::from_integer(0.into()) {
            bail!(Validation, "time breakpoints must be nonnegative");
        }
        let lengths = breakpoints.windows(2).map(|w| S::from_rational(&(&w[1] - &w[0]))).collect();
        Ok(TimeComponent { breakpoints, lengths })
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }

    fn position(&self, t: &Rational) -> Result<usize> {
        match self.breakpoints.binary_search(t) {
            Ok(p) => Ok(p),
            Err(_) => bail!(Validation, "time {} is not a breakpoint", format_rational(t)),
        }
    }

    /// `χ_(s,t)` as a 0/1 combination of elementary indicators.
    pub fn indicator(&self, s: &Rational, t: &Rational) -> Result<Vec<S>> {
        if s >= t {
            bail!(Validation, "interval ({}, {}) is empty", format_rational(s), format_rational(t));
        }
        let (a, b) = (self.position(s)?, self.position(t)?);
        Ok((0..self.dim()).map(|e| if e >= a && e < b { S::one() } else { S::zero() }).collect())
    }

    /// `⟨f, g⟩ = ∫ f g` for combinations of elementary indicators.
    pub fn inner(&self, f: &[S], g: &[S]) -> S {
        (0..self.dim()).fold(S::zero(), |acc, e| acc + f[e].clone() * g[e].clone() * self.lengths[e].clone())
    }

    /// Multiplication by `χ_(s,t)` as a diagonal matrix.
    pub fn multiplier(&self, s: &Rational, t: &Rational) -> Result<Matrix<S>> {
        let chi = self.indicator(s, t)?;
        Ok((0..self.dim())
            .map(|a| (0..self.dim()).map(|b| if a == b { chi[a].clone() } else { S::zero() }).collect())
            .collect())
    }
}

/// An element of the truncated Fock space, stored level by level.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<S> {
    /// `levels[m]` holds the coefficients of the `m`-particle component.
    pub levels: Vec<Option<Vec<S>>>,
}

impl<S: Scalar> FockVector<S> {
    pub fn vacuum() -> Self {
        FockVector { levels: vec![Some(vec![S::one()])] }
    }

    /// Highest level carrying a nonzero coefficient.
    pub fn top_level(&self) -> Option<usize> {
        self.levels
            .iter()
            .enumerate()
            .rev()
            .find(|(_, l)| l.as_ref().is_some_and(|v| v.iter().any(|x| !x.is_zero())))
            .map(|(m, _)| m)
    }

    pub fn vacuum_component(&self) -> S {
        self.levels.first().and_then(|l| l.as_ref()).map_or(S::zero(), |v| v[0].clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Term<S> {
    Scalar(S),
    Create(Vec<S>),
    /// Stores `M x` so that `l(x)ξ₁⊗… = ⟨ξ₁, x⟩ …` is a plain contraction.
    Annihilate(Vec<S>),
    Gauge { time: Matrix<S>, poly: Matrix<S> },
}

/// A structured operator: a sum of scalar, creation, annihilation and gauge terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<S> {
    terms: Vec<Term<S>>,
    pub self_adjoint: bool,
}

impl<S: Scalar> FockOperator<S> {
    pub fn zero() -> Self {
        FockOperator { terms: vec![], self_adjoint: true }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(mut self, other: FockOperator<S>) -> Self {
        self.self_adjoint = false;
        self.terms.extend(other.terms);
        self
    }
}

/// Truncation parameters of a Fock model.
#[derive(Debug, Clone)]
pub struct FockConfig {
    /// Degree cap `d_H` of the polynomial space.
    pub degree: usize,
    /// Particle cap `n_max`.
    pub particles: usize,
    pub breakpoints: Vec<Rational>,
    /// Pivot cutoff for the kernel (floats); exact zero test over rationals.
    pub tolerance: f64,
    pub side: MultiplicationSide,
}

impl FockConfig {
    pub fn new(degree: usize, particles: usize) -> Self {
        FockConfig { degree, particles, breakpoints: standard_breakpoints(), tolerance: 1e-10, side: MultiplicationSide::Right }
    }
}

/// The truncated Fock space over `T ⊗ H` with the defining cumulants.
#[derive(Debug, Clone)]
pub struct FockModel<S> {
    poly: PolySpace<S>,
    time: TimeComponent<S>,
    particles: usize,
    defining: CumulantFunctional<S>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub k: usize,
    #[serde(rename = "d_H")]
    pub d_h: usize,
    pub n_max: usize,
    #[serde(rename = "dim_H")]
    pub dim_h: usize,
    pub dim_one_particle: usize,
    pub dim_fock: u64,
    pub breakpoints: Vec<String>,
    pub multiplication: MultiplicationSide,
}

impl<S: Scalar> FockModel<S> {
    /// Builds the model for the first `k` variables of `cf`.
    pub fn build(cf: &CumulantFunctional<S>, k: usize, config: &FockConfig) -> Result<Self> {
        if config.particles == 0 {
            bail!(Validation, "particle cap must be positive");
        }
        let tol = match Rational::from_float(config.tolerance) {
            Some(t) if !S::EXACT => S::from_rational(&t),
            _ => S::zero(),
        };
        let poly = build_poly_space(cf, k, config.degree, &tol, config.side)?;
        let time = TimeComponent::new(config.breakpoints.clone())?;
        Ok(FockModel { poly, time, particles: config.particles, defining: cf.clone() })
    }

    pub fn poly(&self) -> &PolySpace<S> {
        &self.poly
    }

    pub fn time(&self) -> &TimeComponent<S> {
        &self.time
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn defining(&self) -> &CumulantFunctional<S> {
        &self.defining
    }

    /// `dim Ĥ = dim T · dim H`.
    pub fn dim_one_particle(&self) -> usize {
        self.time.dim() * self.poly.dim()
    }

    /// `1 + Σ_{m=1..n_max} (dim Ĥ)^m`, saturating.
    pub fn dim_fock(&self) -> u64 {
        let d = self.dim_one_particle() as u64;
        let mut total: u64 = 1;
        let mut power: u64 = 1;
        for _ in 0..self.particles {
            power = power.saturating_mul(d);
            total = total.saturating_add(power);
        }
        total
    }

    pub fn summary(&self, side: MultiplicationSide) -> ModelSummary {
        ModelSummary {
            k: self.poly.k,
            d_h: self.poly.degree,
            n_max: self.particles,
            dim_h: self.poly.dim(),
            dim_one_particle: self.dim_one_particle(),
            dim_fock: self.dim_fock(),
            breakpoints: self.time.breakpoints.iter().map(format_rational).collect(),
            multiplication: side,
        }
    }

    fn level_len(&self, m: usize) -> usize {
        self.dim_one_particle().pow(m as u32)
    }

    /// `f ⊗ x` as a one-particle vector.
    pub fn one_particle(&self, time: &[S], poly: &[S]) -> Vec<S> {
        time.iter().flat_map(|a| poly.iter().map(move |b| a.clone() * b.clone())).collect()
    }

    /// Metric of `Ĥ` applied to a coordinate vector.
    fn metric_apply(&self, x: &[S]) -> Vec<S> {
        let dp = self.poly.dim();
        let mut out = Vec::with_capacity(x.len());
        for a in 0..self.time.dim() {
            let mx = linalg::mat_vec(&self.poly.metric, &x[a * dp..(a + 1) * dp]);
            out.extend(mx.into_iter().map(|v| v * self.time.lengths[a].clone()));
        }
        out
    }

    /// `⟨x, y⟩` on `Ĥ`.
    pub fn inner_one(&self, x: &[S], y: &[S]) -> S {
        x.iter().zip(self.metric_apply(y)).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b)
    }

    fn check_one(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim_one_particle() {
            bail!(Structural, "vector of length {} in a one-particle space of dimension {}", x.len(), self.dim_one_particle());
        }
        Ok(())
    }

    pub fn scalar(&self, c: S) -> FockOperator<S> {
        FockOperator { terms: vec![Term::Scalar(c)], self_adjoint: true }
    }

    /// `l*(x)`: `Ω ↦ x`, `ξ₁⊗…⊗ξ_n ↦ x⊗ξ₁⊗…⊗ξ_n`.
    pub fn creation(&self, x: &[S]) -> Result<FockOperator<S>> {
        self.check_one(x)?;
        Ok(FockOperator { terms: vec![Term::Create(x.to_vec())], self_adjoint: false })
    }

    /// `l(x)`: `Ω ↦ 0`, `ξ₁⊗…⊗ξ_n ↦ ⟨ξ₁, x⟩ ξ₂⊗…⊗ξ_n`.
    pub fn annihilation(&self, x: &[S]) -> Result<FockOperator<S>> {
        self.check_one(x)?;
        Ok(FockOperator { terms: vec![Term::Annihilate(self.metric_apply(x))], self_adjoint: false })
    }

    /// `p(T_time ⊗ T_poly)`: acts on the first tensor factor, kills `Ω`.
    pub fn gauge(&self, time: Matrix<S>, poly: Matrix<S>) -> Result<FockOperator<S>> {
        let (dt, dp) = (self.time.dim(), self.poly.dim());
        if time.len() != dt || !linalg::is_square(&time) || poly.len() != dp || !linalg::is_square(&poly) {
            bail!(Structural, "gauge factors must be {}x{} and {}x{}", dt, dt, dp, dp);
        }
        Ok(FockOperator { terms: vec![Term::Gauge { time, poly }], self_adjoint: false })
    }

    /// `a_{s,t}⁽ⁱ⁾ = (t−s)κ₁(a_i) + l(χ⊗X_i) + l*(χ⊗X_i) + p(χ ⊗ X_i)`.
    pub fn levy_increment(&self, i: usize, s: &Rational, t: &Rational) -> Result<FockOperator<S>> {
        if i >= self.poly.k {
            bail!(Structural, "variable {} outside the model's {} variables", i + 1, self.poly.k);
        }
        if s >= t {
            bail!(Validation, "increment needs s < t, got s = {}, t = {}", format_rational(s), format_rational(t));
        }
        let chi = self.time.indicator(s, t)?;
        let x = self.one_particle(&chi, self.poly.letter(i));
        let drift = S::from_rational(&(t - s)) * self.defining.cumulant(&[i])?;
        let mut terms = vec![];
        if !drift.is_zero() {
            terms.push(Term::Scalar(drift));
        }
        if self.poly.dim() > 0 {
            terms.push(Term::Create(x.clone()));
            terms.push(Term::Annihilate(self.metric_apply(&x)));
            terms.push(Term::Gauge { time: self.time.multiplier(s, t)?, poly: self.poly.mult[i].clone() });
        }
        Ok(FockOperator { terms, self_adjoint: self.poly.top_projected })
    }

    /// `a_t⁽ⁱ⁾ = a_{0,t}⁽ⁱ⁾`, with `a_0 = 0`.
    pub fn levy_process(&self, i: usize, t: &Rational) -> Result<FockOperator<S>> {
        if num_traits::Zero::is_zero(t) {
            return Ok(FockOperator::zero());
        }
        self.levy_increment(i, &Rational::from_integer(0.into()), t)
    }

    /// Applies `op`, discarding components above `cap` particles.
    pub fn apply(&self, op: &FockOperator<S>, v: &FockVector<S>, cap: usize) -> FockVector<S> {
        let cap = cap.min(self.particles);
        let mut out: Vec<Option<Vec<S>>> = vec![None; cap + 1];
        let d1 = self.dim_one_particle();
        let (dt, dp) = (self.time.dim(), self.poly.dim());
        for term in &op.terms {
            for (m, level) in v.levels.iter().enumerate() {
                let Some(level) = level else { continue };
                match term {
                    Term::Scalar(c) => {
                        if m > cap {
                            continue;
                        }
                        let target = slot(&mut out, m, level.len());
                        for (o, x) in target.iter_mut().zip(level) {
                            *o = o.clone() + c.clone() * x.clone();
                        }
                    }
                    Term::Create(x) => {
                        if m + 1 > cap {
                            continue;
                        }
                        let rest = level.len();
                        let target = slot(&mut out, m + 1, rest * d1);
                        for (a, xa) in x.iter().enumerate() {
                            if xa.is_zero() {
                                continue;
                            }
                            for (r, v) in level.iter().enumerate() {
                                if !v.is_zero() {
                                    let o = &mut target[a * rest + r];
                                    *o = o.clone() + xa.clone() * v.clone();
                                }
                            }
                        }
                    }
                    Term::Annihilate(mx) => {
                        if m == 0 || m - 1 > cap {
                            continue;
                        }
                        let rest = level.len() / d1;
                        let target = slot(&mut out, m - 1, rest);
                        for (a, ma) in mx.iter().enumerate() {
                            if ma.is_zero() {
                                continue;
                            }
                            for r in 0..rest {
                                let v = &level[a * rest + r];
                                if !v.is_zero() {
                                    target[r] = target[r].clone() + ma.clone() * v.clone();
                                }
                            }
                        }
                    }
                    Term::Gauge { time, poly } => {
                        if m == 0 || m > cap {
                            continue;
                        }
                        let rest = level.len() / d1;
                        // First the time factor, then the polynomial factor.
                        let mut mid = vec![S::zero(); level.len()];
                        for bt in 0..dt {
                            for at in 0..dt {
                                let c = &time[bt][at];
                                if c.is_zero() {
                                    continue;
                                }
                                for j in 0..dp * rest {
                                    let v = &level[at * dp * rest + j];
                                    if !v.is_zero() {
                                        let o = &mut mid[bt * dp * rest + j];
                                        *o = o.clone() + c.clone() * v.clone();
                                    }
                                }
                            }
                        }
                        let target = slot(&mut out, m, level.len());
                        for bt in 0..dt {
                            for bp in 0..dp {
                                for ap in 0..dp {
                                    let c = &poly[bp][ap];
                                    if c.is_zero() {
                                        continue;
                                    }
                                    for r in 0..rest {
                                        let v = &mid[(bt * dp + ap) * rest + r];
                                        if !v.is_zero() {
                                            let o = &mut target[(bt * dp + bp) * rest + r];
                                            *o = o.clone() + c.clone() * v.clone();
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        FockVector { levels: out }
    }

    /// `(op₁ ⋯ op_n) Ω` without pruning beyond the particle cap.
    pub fn apply_product_to_vacuum(&self, ops: &[&FockOperator<S>]) -> FockVector<S> {
        let mut v = FockVector::vacuum();
        for op in ops.iter().rev() {
            v = self.apply(op, &v, self.particles);
        }
        v
    }

    /// `τ(op₁ ⋯ op_n) = ⟨op₁ ⋯ op_n Ω, Ω⟩`.
    ///
    /// Levels that can no longer return to the vacuum with the remaining
    /// factors are dropped on the way.
    pub fn vacuum_moment(&self, ops: &[&FockOperator<S>]) -> S {
        let mut v = FockVector::vacuum();
        for (pos, op) in ops.iter().enumerate().rev() {
            v = self.apply(op, &v, pos);
        }
        v.vacuum_component()
    }

    /// Vacuum moments of all words up to `order` in the given operators.
    pub fn vacuum_moments(&self, names: Vec<String>, ops: &[FockOperator<S>], order: usize) -> Result<MomentFunctional<S>> {
        if names.len() != ops.len() {
            bail!(Structural, "{} names for {} operators", names.len(), ops.len());
        }
        MomentFunctional::from_fn(names, order, |w| {
            let seq: Vec<&FockOperator<S>> = w.letters().iter().map(|&l| &ops[l]).collect();
            self.vacuum_moment(&seq)
        })
    }

    fn basis_vector(&self, j: usize) -> FockVector<S> {
        let mut levels = vec![];
        let mut offset = 0;
        for m in 0..=self.particles {
            let len = self.level_len(m);
            if j >= offset && j < offset + len {
                let mut v = vec![S::zero(); len];
                v[j - offset] = S::one();
                levels.push(Some(v));
            } else {
                levels.push(None);
            }
            offset += len;
        }
        FockVector { levels }
    }

    fn flatten(&self, v: &FockVector<S>) -> Vec<S> {
        let mut out = vec![];
        for m in 0..=self.particles {
            match v.levels.get(m).and_then(|l| l.as_ref()) {
                Some(l) => out.extend(l.iter().cloned()),
                None => out.extend(std::iter::repeat(S::zero()).take(self.level_len(m))),
            }
        }
        out
    }

    fn check_dense(&self) -> Result<usize> {
        let dim = self.dim_fock();
        if dim > 4096 {
            bail!(Capacity, "Fock dimension {} is too large for a dense matrix", dim);
        }
        Ok(dim as usize)
    }

    /// Dense matrix of `op` on the Fock basis (levels in order).
    pub fn dense_matrix(&self, op: &FockOperator<S>) -> Result<Matrix<S>> {
        let dim = self.check_dense()?;
        let cols: Vec<Vec<S>> = (0..dim).map(|j| self.flatten(&self.apply(op, &self.basis_vector(j), self.particles))).collect();
        Ok(linalg::transpose(&cols))
    }

    /// Dense metric of the Fock basis: `1 ⊕ M ⊕ M⊗M ⊕ …`.
    pub fn dense_metric(&self) -> Result<Matrix<S>> {
        let dim = self.check_dense()?;
        let mut out = vec![vec![S::zero(); dim]; dim];
        let mut offset = 0;
        let one: Matrix<S> = (0..self.dim_one_particle())
            .map(|j| {
                let mut e = vec![S::zero(); self.dim_one_particle()];
                e[j] = S::one();
                self.metric_apply(&e)
            })
            .collect();
        let mut block: Matrix<S> = vec![vec![S::one()]];
        for _ in 0..=self.particles {
            for (i, row) in block.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out[offset + i][offset + j] = v.clone();
                }
            }
            offset += block.len();
            block = kron(&one, &block);
        }
        Ok(out)
    }
}

fn kron<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let (na, nb) = (a.len(), b.len());
    (0..na * nb).map(|i| (0..na * nb).map(|j| a[i / nb][j / nb].clone() * b[i % nb][j % nb].clone()).collect()).collect()
}

fn slot<S: Scalar>(out: &mut [Option<Vec<S>>], m: usize, len: usize) -> &mut Vec<S> {
    out[m].get_or_insert_with(|| vec![S::zero(); len])
}

/// One section of the Lévy-axiom report.
#[derive(Debug, Clone, Serialize)]
pub struct LevySection {
    pub max_error: f64,
    pub pass: bool,
    pub detail: String,
}

impl LevySection {
    fn new(max_error: f64, tolerance: f64, detail: String) -> Self {
        LevySection { max_error, pass: max_error <= tolerance, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevyReport {
    pub order: usize,
    pub tolerance: f64,
    pub model: ModelSummary,
    /// Vacuum moments of `a_{0,1}` words against the defining moments.
    pub exactness: LevySection,
    /// Mixed cumulants of increments on `(0,1)` and `(1,2)`.
    pub freeness: LevySection,
    /// Moments of `a_{2,3}` against moments of `a_{0,1}`.
    pub stationarity: LevySection,
    /// `a_0 = 0`.
    pub vanishing_at_zero: LevySection,
    /// `κ(a_{0,t}) = t·κ` and `|φ(a_{0,t}-word)| ≤ t·Σ_π|κ_π|` for small `t`.
    pub small_time: LevySection,
    pub small_time_moments: Vec<(String, f64)>,
}

impl LevyReport {
    pub fn passed(&self) -> bool {
        [&self.exactness, &self.freeness, &self.stationarity, &self.vanishing_at_zero, &self.small_time]
            .iter()
            .all(|s| s.pass)
    }

    pub fn to_text(&self) -> String {
        let mut lines = vec![vec!["section".to_string(), "max_error".into(), "pass".into(), "detail".into()]];
        for (name, s) in [
            ("exactness", &self.exactness),
            ("freeness", &self.freeness),
            ("stationarity", &self.stationarity),
            ("vanishing_at_zero", &self.vanishing_at_zero),
            ("small_time", &self.small_time),
        ] {
            lines.push(vec![name.into(), format!("{:.3e}", s.max_error), s.pass.to_string(), s.detail.clone()]);
        }
        crate::limits::align(&lines)
    }
}

fn max_abs_diff<S: Scalar>(a: &MomentFunctional<S>, b: &MomentFunctional<S>) -> f64 {
    a.table().values().iter().zip(b.table().values()).map(|(x, y)| (x.clone() - y.clone()).to_f64().abs()).fold(0.0, f64::max)
}

/// Checks the four Lévy-process conditions (plus exactness) up to `order`.
pub fn verify_levy_axioms<S: Scalar>(model: &FockModel<S>, order: usize, tolerance: f64) -> Result<LevyReport> {
    if model.particles < order || model.poly.degree < order {
        bail!(
            Capacity,
            "checks up to order {} need n_max and d_H at least {} (have {} and {})",
            order,
            order,
            model.particles,
            model.poly.degree
        );
    }
    if order > model.defining.max_order() {
        bail!(Validation, "order {} exceeds the defining functional's order", order);
    }
    for t in standard_breakpoints() {
        model.time.position(&t)?;
    }
    let k = model.poly.k;
    let names: Vec<String> = model.defining.alphabet()[..k].to_vec();
    let r = |n: i64, d: i64| ratio(n, d);
    let increments = |s: &Rational, t: &Rational| -> Result<Vec<FockOperator<S>>> {
        (0..k).map(|i| model.levy_increment(i, s, t)).collect()
    };

    let target = cumulants_to_moments(&model.defining.truncate(order));
    let target = MomentFunctional::from_fn(names.clone(), order, |w| target.moment(&w.0).unwrap())?;
    let a01 = increments(&r(0, 1), &r(1, 1))?;
    let m01 = model.vacuum_moments(names.clone(), &a01, order)?;
    let exactness = LevySection::new(max_abs_diff(&m01, &target), tolerance, format!("{} words", m01.table().values().len()));

    let a12 = increments(&r(1, 1), &r(2, 1))?;
    let joint_names: Vec<String> =
        names.iter().map(|n| format!("{}(0,1)", n)).chain(names.iter().map(|n| format!("{}(1,2)", n))).collect();
    let joint_ops: Vec<FockOperator<S>> = a01.iter().chain(&a12).cloned().collect();
    let joint = model.vacuum_moments(joint_names, &joint_ops, order)?;
    let cf = moments_to_cumulants(&joint);
    let group_of: Vec<usize> = (0..2 * k).map(|l| l / k).collect();
    let grouping = vec![(0..k).collect(), (k..2 * k).collect()];
    let free_report = check_cumulant_freeness(&cf, &group_of, &grouping, &S::zero())?;
    let freeness = LevySection::new(
        free_report.max_violation(),
        tolerance,
        format!("{} mixed words with nonzero cumulant", free_report.violations.len()),
    );

    let a23 = increments(&r(2, 1), &r(3, 1))?;
    let m23 = model.vacuum_moments(names.clone(), &a23, order)?;
    let stationarity = LevySection::new(max_abs_diff(&m23, &m01), tolerance, "(2,3) against (0,1)".into());

    let zero_ops: Vec<FockOperator<S>> = (0..k).map(|i| model.levy_process(i, &r(0, 1))).collect::<Result<_>>()?;
    let all_zero = zero_ops.iter().all(FockOperator::is_zero);
    let m0 = model.vacuum_moments(names.clone(), &zero_ops, order)?;
    let zero_err = m0.table().values().iter().map(|v| v.to_f64().abs()).fold(if all_zero { 0.0 } else { f64::INFINITY }, f64::max);
    let vanishing_at_zero = LevySection::new(zero_err, tolerance, format!("a_0 is the zero operator: {}", all_zero));

    let mut semigroup_err: f64 = 0.0;
    let mut bound_ok = true;
    let mut small_time_moments = vec![];
    let kappa = model.defining.truncate(order);
    let bounds: Vec<f64> = words_up_to(k, order)
        .map(|w| {
            nc_cached(w.len())
                .iter()
                .map(|p| p.blocks().iter().map(|b| kappa.cumulant(&w.subword(b).0).unwrap().to_f64().abs()).product::<f64>())
                .sum()
        })
        .collect();
    for t in [r(1, 1), r(1, 2), r(1, 4), r(1, 8)] {
        let ops: Vec<FockOperator<S>> = (0..k).map(|i| model.levy_process(i, &t)).collect::<Result<_>>()?;
        let mt = model.vacuum_moments(names.clone(), &ops, order)?;
        let kt = moments_to_cumulants(&mt);
        let scaled = kappa.scaled(&S::from_rational(&t));
        for (x, y) in kt.table().values().iter().zip(scaled.table().values()) {
            semigroup_err = semigroup_err.max((x.clone() - y.clone()).to_f64().abs());
        }
        let tf = t.to_f64();
        for (m, b) in mt.table().values().iter().zip(&bounds) {
            if m.to_f64().abs() > tf * b + tolerance {
                bound_ok = false;
            }
        }
        let largest = mt.table().values().iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        small_time_moments.push((format_rational(&t), largest));
    }
    let mut small_time = LevySection::new(semigroup_err, tolerance, format!("moments within t·Σ|κ_π|: {}", bound_ok));
    small_time.pass &= bound_ok;

    Ok(LevyReport {
        order,
        tolerance,
        model: model.summary(MultiplicationSide::Right),
        exactness,
        freeness,
        stationarity,
        vanishing_at_zero,
        small_time,
        small_time_moments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{free_poisson, semicircle, semicircle_family, CovarianceMatrix};
    use crate::scalar::rat;

    fn config(d: usize, n: usize, breaks: &[i64]) -> FockConfig {
        FockConfig { breakpoints: breaks.iter().map(|&b| rat(b)).collect(), ..FockConfig::new(d, n) }
    }

    #[test]
    fn poly_space_dimensions() {
        let s = semicircle(&rat(2), 4).unwrap();
        let ps = build_poly_space(&s, 1, 2, &rat(0), MultiplicationSide::Right).unwrap();
        assert_eq!(ps.dim(), 1);
        let fp = free_poisson(&rat(1), &rat(1), 4).unwrap();
        assert_eq!(build_poly_space(&fp, 1, 2, &rat(0), MultiplicationSide::Right).unwrap().dim(), 1);
        let zero = CumulantFunctional::<Rational>::zero(vec!["a".into()], 4).unwrap();
        assert_eq!(build_poly_space(&zero, 1, 2, &rat(0), MultiplicationSide::Right).unwrap().dim(), 0);
        let bern = crate::cumulant::moments_to_cumulants(
            &crate::models::bernoulli(&ratio(1, 2), &rat(1), &rat(-1), 4).unwrap(),
        );
        assert!(matches!(build_poly_space(&bern, 1, 2, &rat(0), MultiplicationSide::Right), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn creation_annihilation_basics() {
        let s = semicircle(&rat(2), 4).unwrap();
        let m = FockModel::build(&s, 1, &config(2, 2, &[0, 1, 2])).unwrap();
        let x = m.one_particle(&[rat(1), rat(2)], &[rat(3)]);
        let l = m.annihilation(&x).unwrap();
        let ls = m.creation(&x).unwrap();
        assert_eq!(m.apply(&l, &FockVector::vacuum(), 2).top_level(), None);
        assert_eq!(m.vacuum_moment(&[&l, &ls]), m.inner_one(&x, &x));
        assert_eq!(m.inner_one(&x, &x), rat(9 + 36));
        assert_eq!(m.vacuum_moment(&[]), rat(1));
        let g = m.gauge(linalg::identity(2), linalg::identity(1)).unwrap();
        assert_eq!(m.vacuum_moment(&[&g]), rat(0));
        let xi = m.apply(&ls, &m.apply(&ls, &FockVector::vacuum(), 2), 2);
        assert_eq!(m.apply(&g, &xi, 2), xi);
    }

    #[test]
    fn annihilation_is_adjoint_of_creation() {
        let s = semicircle_family(&CovarianceMatrix::new(vec![vec![rat(2), rat(1)], vec![rat(1), rat(1)]]).unwrap(), 4).unwrap();
        let m = FockModel::build(&s, 2, &config(2, 2, &[0, 1, 3])).unwrap();
        let x = m.one_particle(&[rat(1), ratio(-1, 2)], &[rat(1), rat(2)]);
        let (l, ls) = (m.dense_matrix(&m.annihilation(&x).unwrap()).unwrap(), m.dense_matrix(&m.creation(&x).unwrap()).unwrap());
        let g = m.dense_metric().unwrap();
        // ⟨lξ, η⟩ = ⟨ξ, l*η⟩ on the truncated space: lᵀ G = G l*.
        assert_eq!(linalg::mat_mul(&linalg::transpose(&l), &g), linalg::mat_mul(&g, &ls));
    }

    #[test]
    fn increment_examples() {
        let fp = free_poisson(&rat(2), &rat(3), 6).unwrap();
        let m = FockModel::build(&fp, 1, &config(3, 3, &[0, 1, 2, 3])).unwrap();
        let a01 = m.levy_increment(0, &rat(0), &rat(1)).unwrap();
        let a02 = m.levy_increment(0, &rat(0), &rat(2)).unwrap();
        assert_eq!(m.vacuum_moment(&[&a02]), rat(2 * 6));
        assert_eq!(m.vacuum_moment(&[&a01, &a01]), rat(36 + 18));
        assert!(m.levy_increment(0, &rat(1), &rat(1)).is_err());
        assert!(m.levy_process(0, &rat(0)).unwrap().is_zero());
    }

    #[test]
    fn increment_is_self_adjoint_on_small_model() {
        let fp = free_poisson(&rat(1), &rat(2), 5).unwrap();
        let m = FockModel::build(&fp, 1, &config(2, 2, &[0, 1, 2])).unwrap();
        let a = m.levy_increment(0, &rat(0), &rat(1)).unwrap();
        assert!(a.self_adjoint);
        let (am, g) = (m.dense_matrix(&a).unwrap(), m.dense_metric().unwrap());
        assert_eq!(linalg::mat_mul(&linalg::transpose(&am), &g), linalg::mat_mul(&g, &am));
    }

    #[test]
    fn semicircle_model_passes_levy_checks() {
        let s = semicircle_family(&CovarianceMatrix::identity(2), 8).unwrap();
        let m = FockModel::build(&s, 2, &FockConfig::new(4, 4)).unwrap();
        let rep = verify_levy_axioms(&m, 4, 0.0).unwrap();
        assert!(rep.passed(), "{}", rep.to_text());
        assert!(matches!(verify_levy_axioms(&m, 5, 0.0), Err(crate::Error::Capacity(_))));
    }
}

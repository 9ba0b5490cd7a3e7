//! Free products of distributions and freeness certificates.
//!
//! Freeness is encoded through cumulants: the joint cumulants of a free
//! union restrict to each family's cumulants on pure words and vanish on
//! every mixed word.

use serde::Serialize;

use crate::cumulant::{cumulants_to_moments, moment_from_cumulants, moments_to_cumulants, CumulantFunctional, MomentFunctional};
use crate::error::{bail, Result};
use crate::scalar::{Rational, Scalar};
use crate::word::Word;

/// Maps each letter of a union alphabet to (family, letter within family).
fn union_alphabet<S: Scalar>(families: &[CumulantFunctional<S>]) -> Result<(Vec<String>, Vec<(usize, usize)>)> {
    let mut names: Vec<String> = Vec::new();
    let mut origin = Vec::new();
    for (f, fam) in families.iter().enumerate() {
        for (l, name) in fam.alphabet().iter().enumerate() {
            if names.contains(name) {
                bail!(Structural, "variable {:?} appears in more than one family", name);
            }
            names.push(name.clone());
            origin.push((f, l));
        }
    }
    Ok((names, origin))
}

/// The joint law of freely independent families, evaluated lazily per word.
#[derive(Debug, Clone)]
pub struct FreeProductLaw<S = Rational> {
    families: Vec<CumulantFunctional<S>>,
    alphabet: Vec<String>,
    origin: Vec<(usize, usize)>,
}

impl<S: Scalar> FreeProductLaw<S> {
    pub fn new(families: Vec<CumulantFunctional<S>>) -> Result<Self> {
        if families.is_empty() {
            bail!(Structural, "free product of no families");
        }
        let (alphabet, origin) = union_alphabet(&families)?;
        Ok(FreeProductLaw { families, alphabet, origin })
    }

    pub fn from_moments(families: &[MomentFunctional<S>]) -> Result<Self> {
        Self::new(families.iter().map(moments_to_cumulants).collect())
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Largest word length every family can answer.
    pub fn max_order(&self) -> usize {
        self.families.iter().map(|f| f.max_order()).min().unwrap_or(0)
    }

    /// Joint cumulant: the family cumulant on pure words, zero on mixed words.
    pub fn cumulant(&self, word: &[usize]) -> Result<S> {
        if word.is_empty() {
            bail!(Domain, "free cumulants are not defined on the empty word");
        }
        let mut family = None;
        let mut local = Vec::with_capacity(word.len());
        for &l in word {
            let Some(&(f, ll)) = self.origin.get(l) else {
                bail!(Structural, "letter {} outside the union alphabet", l + 1);
            };
            match family {
                None => family = Some(f),
                Some(g) if g != f => return Ok(S::zero()),
                _ => {}
            }
            local.push(ll);
        }
        self.families[family.unwrap()].cumulant(&local)
    }

    /// Joint moment of an arbitrary-length word.
    ///
    /// Only cumulants of sub-words that stay inside one family are consulted,
    /// so words longer than the family orders are fine as long as each
    /// family's pure sub-words fit.
    pub fn moment(&self, word: &[usize]) -> Result<S> {
        if let Some(&bad) = word.iter().find(|&&l| l >= self.origin.len()) {
            bail!(Structural, "letter {} outside the union alphabet", bad + 1);
        }
        moment_from_cumulants(word, &mut |w: &[usize]| self.cumulant(w))
    }

    /// Dense joint moment table up to `order`.
    pub fn moments(&self, order: usize) -> Result<MomentFunctional<S>> {
        if order > self.max_order() {
            bail!(Validation, "order {} exceeds the smallest family order {}", order, self.max_order());
        }
        let cf = self.cumulants(order)?;
        Ok(cumulants_to_moments(&cf))
    }

    /// Dense joint cumulant table up to `order`.
    pub fn cumulants(&self, order: usize) -> Result<CumulantFunctional<S>> {
        if order > self.max_order() {
            bail!(Validation, "order {} exceeds the smallest family order {}", order, self.max_order());
        }
        CumulantFunctional::from_fn(self.alphabet.clone(), order, |w| self.cumulant(&w.0).unwrap())
    }
}

/// Joint distribution of freely independent families, up to `order`.
pub fn free_product<S: Scalar>(families: &[MomentFunctional<S>], order: usize) -> Result<MomentFunctional<S>> {
    FreeProductLaw::from_moments(families)?.moments(order)
}

/// Result of a freeness check: mixed words with non-negligible cumulants.
#[derive(Debug, Clone, Serialize)]
pub struct FreenessReport {
    pub order: usize,
    pub groups: Vec<Vec<String>>,
    pub violations: Vec<FreenessViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreenessViolation {
    pub word: String,
    pub cumulant: String,
    pub magnitude: f64,
}

impl FreenessReport {
    pub fn is_free(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.iter().map(|v| v.magnitude).fold(0.0, f64::max)
    }
}

/// Lists mixed words (letters from two or more groups) of length `2..=order`
/// whose cumulant exceeds `tolerance` in magnitude.
pub fn check_freeness<S: Scalar>(
    mf: &MomentFunctional<S>,
    grouping: &[Vec<usize>],
    order: usize,
    tolerance: &S,
) -> Result<FreenessReport> {
    if order > mf.max_order() {
        bail!(Validation, "order {} exceeds the functional order {}", order, mf.max_order());
    }
    let mut group_of = vec![usize::MAX; mf.k()];
    for (g, group) in grouping.iter().enumerate() {
        for &l in group {
            if l >= mf.k() || group_of[l] != usize::MAX {
                bail!(Structural, "grouping is not a partition of the alphabet");
            }
            group_of[l] = g;
        }
    }
    if group_of.contains(&usize::MAX) {
        bail!(Structural, "grouping does not cover the alphabet");
    }
    let cf = moments_to_cumulants(&mf.truncate(order));
    check_cumulant_freeness(&cf, &group_of, grouping, tolerance)
}

pub(crate) fn check_cumulant_freeness<S: Scalar>(
    cf: &CumulantFunctional<S>,
    group_of: &[usize],
    grouping: &[Vec<usize>],
    tolerance: &S,
) -> Result<FreenessReport> {
    let names = cf.alphabet();
    let violations = cf
        .iter()
        .filter(|(w, _)| w.len() >= 2 && w.letters().iter().any(|&l| group_of[l] != group_of[w.letters()[0]]))
        .filter(|(_, v)| v.abs_val() > *tolerance)
        .map(|(w, v)| FreenessViolation { word: w.render(names), cumulant: v.to_string(), magnitude: v.to_f64().abs() })
        .collect();
    Ok(FreenessReport {
        order: cf.max_order(),
        groups: grouping.iter().map(|g| g.iter().map(|&l| names[l].clone()).collect()).collect(),
        violations,
    })
}

/// `N` freely independent copies of a family; copy `j` of variable `x` is named `x#j`.
pub fn free_copies<S: Scalar>(row: &MomentFunctional<S>, copies: usize, order: usize) -> Result<MomentFunctional<S>> {
    let families: Vec<MomentFunctional<S>> = (1..=copies)
        .map(|j| {
            let names = row.alphabet().iter().map(|a| format!("{}#{}", a, j)).collect();
            MomentFunctional::new(names, row.table().clone())
        })
        .collect::<Result<_>>()?;
    free_product(&families, order)
}

/// Letters `x#1 + … + x#N` for each variable `x` of a row, as polynomials over
/// the alphabet produced by [`free_copies`].
pub fn copy_sums<S: Scalar>(k: usize, copies: usize) -> Vec<crate::poly::NcPolynomial<S>> {
    (0..k)
        .map(|i| {
            let mut p = crate::poly::NcPolynomial::zero();
            for j in 0..copies {
                p.add_term(Word::new(vec![j * k + i]), S::one());
            }
            p
        })
        .collect()
}

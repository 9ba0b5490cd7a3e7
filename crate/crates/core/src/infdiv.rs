//! Positivity of the cumulant form `⟨X_w, X_v⟩ = κ(w · rev v)`.
//!
//! A negative direction of the Gram matrix is a certificate that a joint
//! distribution is not freely infinitely divisible. Positivity at a finite
//! degree is only evidence.

use rayon::prelude::*;
use serde::Serialize;

use crate::cumulant::{CumulantFunctional, MomentFunctional};
use crate::error::{bail, Result};
use crate::linalg::{self, Definiteness, Matrix};
use crate::scalar::Scalar;
use crate::word::{words_of_length, Word};

/// The cumulant (or moment) form on monomials, indexed by degree then lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<S> {
    pub index: Vec<Word>,
    pub entries: Matrix<S>,
}

impl<S> GramMatrix<S> {
    pub fn dim(&self) -> usize {
        self.index.len()
    }
}

/// Monomials over `k` letters with degrees `lo..=hi`.
pub fn monomial_index(k: usize, lo: usize, hi: usize) -> Vec<Word> {
    (lo..=hi).flat_map(|m| words_of_length(k, m)).collect()
}

fn assemble<S: Scalar>(index: Vec<Word>, value: impl Fn(&[usize]) -> S + Sync) -> GramMatrix<S> {
    let entries = index
        .par_iter()
        .map(|w| {
            index
                .iter()
                .map(|v| {
                    let mut letters = w.0.clone();
                    letters.extend(v.0.iter().rev());
                    value(&letters)
                })
                .collect()
        })
        .collect();
    GramMatrix { index, entries }
}

fn check_vars(k: usize, available: usize) -> Result<()> {
    if k == 0 || k > available {
        bail!(Validation, "{} variables requested from an alphabet of {}", k, available);
    }
    Ok(())
}

/// Entries `κ(w · rev v)` over the first `k` variables, degrees `1..=d`.
pub fn gram_matrix<S: Scalar>(cf: &CumulantFunctional<S>, k: usize, degree: usize) -> Result<GramMatrix<S>> {
    check_vars(k, cf.k())?;
    if cf.max_order() < 2 * degree {
        bail!(Validation, "degree {} needs cumulants up to order {}, have {}", degree, 2 * degree, cf.max_order());
    }
    Ok(assemble(monomial_index(k, 1, degree), |w| cf.cumulant(w).unwrap()))
}

/// Entries `φ(w · rev v)` over the first `k` variables; degrees start at 0
/// when `with_unit` is set.
pub fn moment_gram<S: Scalar>(mf: &MomentFunctional<S>, k: usize, degree: usize, with_unit: bool) -> Result<GramMatrix<S>> {
    check_vars(k, mf.k())?;
    if mf.max_order() < 2 * degree {
        bail!(Validation, "degree {} needs moments up to order {}, have {}", degree, 2 * degree, mf.max_order());
    }
    let lo = if with_unit { 0 } else { 1 };
    Ok(assemble(monomial_index(k, lo, degree), |w| mf.moment(w).unwrap()))
}

/// Outcome of the positivity test.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdVerdict<S> {
    pub psd: bool,
    pub rank: Option<usize>,
    pub pivots: Vec<(usize, S)>,
    /// `v` with `vᵀGv < −tolerance`, in the monomial basis.
    pub witness: Option<Vec<S>>,
    pub value: Option<S>,
}

/// Symmetric decomposition with diagonal pivoting; a failure comes with a witness.
pub fn is_psd<S: Scalar>(g: &GramMatrix<S>, tolerance: &S) -> Result<PsdVerdict<S>> {
    if !linalg::is_square(&g.entries) || g.entries.len() != g.index.len() {
        bail!(Structural, "Gram matrix is not square");
    }
    if linalg::max_asymmetry(&g.entries) > *tolerance {
        bail!(Validation, "Gram matrix is not symmetric within tolerance");
    }
    let d = linalg::pivoted_ldl(&g.entries, tolerance)?;
    Ok(match d.outcome {
        Definiteness::Psd { rank } => PsdVerdict { psd: true, rank: Some(rank), pivots: d.pivots, witness: None, value: None },
        Definiteness::Negative { witness, value } => {
            PsdVerdict { psd: false, rank: None, pivots: d.pivots, witness: Some(witness), value: Some(value) }
        }
    })
}

/// `Σ c_w X_w` with the variable names substituted.
pub fn render_polynomial<S: Scalar>(coeffs: &[S], index: &[Word], names: &[String]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .zip(index)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, w)| {
            let mono = w.letters().iter().map(|&l| names[l].as_str()).collect::<Vec<_>>().join("*");
            if c.is_one() {
                mono
            } else {
                format!("({})*{}", c, mono)
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Positive semidefinite at this degree: consistent with infinite divisibility.
    #[serde(rename = "PASS")]
    Pass,
    /// A polynomial with negative norm exists: certified not infinitely divisible.
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct PivotEntry {
    pub monomial: String,
    pub pivot: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfDivReport {
    pub degree: usize,
    pub dimension: usize,
    pub verdict: Verdict,
    pub rank: Option<usize>,
    pub witness: Option<Vec<String>>,
    pub witness_polynomial: Option<String>,
    pub witness_value: Option<String>,
    pub pivot_trace: Vec<PivotEntry>,
    pub note: String,
}

impl InfDivReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "verdict: {:?}\ndegree: {}\ndimension: {}\n",
            self.verdict, self.degree, self.dimension
        )
        .replace("Pass", "PASS")
        .replace("Fail", "FAIL");
        if let Some(r) = self.rank {
            out.push_str(&format!("rank: {}\n", r));
        }
        if let (Some(p), Some(v)) = (&self.witness_polynomial, &self.witness_value) {
            out.push_str(&format!("witness: {}\n<P,P> = {}\n", p, v));
        }
        out.push_str(&self.note);
        out.push('\n');
        out
    }
}

/// Infinite-divisibility check of the first `k` variables at degree `d`.
pub fn check_infdiv<S: Scalar>(cf: &CumulantFunctional<S>, k: usize, degree: usize, tolerance: &S) -> Result<InfDivReport> {
    let g = gram_matrix(cf, k, degree)?;
    let v = is_psd(&g, tolerance)?;
    let names = cf.alphabet();
    let pivot_trace = v
        .pivots
        .iter()
        .map(|(i, p)| PivotEntry { monomial: g.index[*i].render(names), pivot: p.to_string() })
        .collect();
    let (verdict, note) = if v.psd {
        (Verdict::Pass, "positive semidefinite up to this degree; evidence, not proof, of infinite divisibility")
    } else {
        (Verdict::Fail, "negative direction found; the distribution is not freely infinitely divisible")
    };
    Ok(InfDivReport {
        degree,
        dimension: g.dim(),
        verdict,
        rank: v.rank,
        witness_polynomial: v.witness.as_ref().map(|w| render_polynomial(w, &g.index, names)),
        witness: v.witness.map(|w| w.iter().map(ToString::to_string).collect()),
        witness_value: v.value.map(|x| x.to_string()),
        pivot_trace,
        note: note.into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaChecks {
    /// Whether the moment functional is tracial, the precondition of the checks.
    pub precondition_tracial: bool,
    /// Words `w` with `κ(w) ≠ κ(rotation of w)`.
    pub tracial_violations: Vec<String>,
    /// Words `w` with `κ(w) ≠ κ(reverse w)`.
    pub reversal_violations: Vec<String>,
}

impl KappaChecks {
    pub fn passed(&self) -> bool {
        self.tracial_violations.is_empty() && self.reversal_violations.is_empty()
    }
}

/// Traciality and reversal symmetry of `κ` on words up to length `d`.
pub fn kappa_functional_checks<S: Scalar>(cf: &CumulantFunctional<S>, mf: &MomentFunctional<S>, d: usize) -> Result<KappaChecks> {
    if d > cf.max_order() || d > mf.max_order() {
        bail!(Validation, "order {} exceeds the table order", d);
    }
    let names = cf.alphabet();
    let mut tracial = Vec::new();
    let mut reversal = Vec::new();
    for (w, v) in cf.iter().filter(|(w, _)| w.len() <= d) {
        let mut rot = w.0.clone();
        rot.rotate_left(1);
        if cf.cumulant(&rot)? != *v {
            tracial.push(w.render(names));
        }
        if cf.cumulant(&w.reversed().0)? != *v {
            reversal.push(w.render(names));
        }
    }
    Ok(KappaChecks {
        precondition_tracial: mf.truncate(d).is_tracial(),
        tracial_violations: tracial,
        reversal_violations: reversal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulant::moments_to_cumulants;
    use crate::models::{bernoulli, free_poisson, semicircle};
    use crate::scalar::{rat, ratio, Rational};

    fn entries(g: &GramMatrix<Rational>) -> Vec<Vec<i64>> {
        g.entries.iter().map(|r| r.iter().map(|x| x.to_integer().try_into().unwrap()).collect()).collect()
    }

    #[test]
    fn gram_examples() {
        let s = semicircle(&rat(2), 4).unwrap();
        assert_eq!(entries(&gram_matrix(&s, 1, 2).unwrap()), vec![vec![1, 0], vec![0, 0]]);
        let (l, a) = (rat(3), rat(2));
        let fp = free_poisson(&l, &a, 4).unwrap();
        let g = gram_matrix(&fp, 1, 2).unwrap();
        assert_eq!(entries(&g), vec![vec![12, 24], vec![24, 48]]);
        assert_eq!(is_psd(&g, &rat(0)).unwrap().rank, Some(1));
        let b = moments_to_cumulants(&bernoulli(&ratio(1, 2), &rat(1), &rat(-1), 4).unwrap());
        assert_eq!(entries(&gram_matrix(&b, 1, 2).unwrap()), vec![vec![1, 0], vec![0, -1]]);
        assert!(gram_matrix(&b, 1, 3).is_err());
    }

    #[test]
    fn bernoulli_fails_with_witness() {
        let b = moments_to_cumulants(&bernoulli(&ratio(1, 2), &rat(1), &rat(-1), 4).unwrap());
        let r = check_infdiv(&b, 1, 2, &rat(0)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witness.unwrap(), vec!["0", "1"]);
        assert_eq!(r.witness_polynomial.unwrap(), "a*a");
        assert_eq!(r.witness_value.unwrap(), "-1");
    }

    #[test]
    fn asymmetric_gram_rejected() {
        let g = GramMatrix { index: monomial_index(1, 1, 2), entries: vec![vec![rat(1), rat(1)], vec![rat(0), rat(1)]] };
        assert!(matches!(is_psd(&g, &rat(0)), Err(crate::Error::Validation(_))));
    }

    #[test]
    fn non_tracial_table_reports_violations() {
        let names = vec!["a1".to_string(), "a2".to_string()];
        let mf = MomentFunctional::from_fn(names, 2, |w| match w.letters() {
            [0, 1] => rat(1),
            [1, 0] => rat(2),
            _ => rat(0),
        })
        .unwrap();
        let cf = moments_to_cumulants(&mf);
        let r = kappa_functional_checks(&cf, &mf, 2).unwrap();
        assert!(!r.precondition_tracial);
        assert_eq!(r.tracial_violations, vec!["a1 a2", "a2 a1"]);
        let single = moments_to_cumulants(&bernoulli(&ratio(1, 3), &rat(2), &rat(-1), 4).unwrap());
        let r = kappa_functional_checks(&single, &crate::cumulant::cumulants_to_moments(&single), 4).unwrap();
        assert!(r.precondition_tracial && r.passed());
    }
}

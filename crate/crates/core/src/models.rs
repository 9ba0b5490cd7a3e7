//! Named distributions as moment or cumulant functionals.
//!
//! Semicircle families, free Poisson and compound free Poisson laws,
//! projections and Bernoulli elements, the three canonical joint laws of
//! projection families, and the semicircle-sandwich families `s_i a_i s_i`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cumulant::{CumulantFunctional, MomentFunctional};
use crate::error::{bail, Result};
use crate::freeness::free_product;
use crate::linalg::{self, Definiteness, Matrix};
use crate::scalar::{pow, rat, Rational};
use crate::word::Word;

fn indexed(prefix: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=k).map(|i| format!("{}{}", prefix, i)).collect()
    }
}

/// A symmetric positive semidefinite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: Matrix<Rational>,
}

impl CovarianceMatrix {
    pub fn new(entries: Matrix<Rational>) -> Result<Self> {
        if entries.is_empty() || !linalg::is_square(&entries) {
            bail!(Validation, "covariance must be a non-empty square matrix");
        }
        if !linalg::max_asymmetry(&entries).is_zero() {
            bail!(Validation, "covariance matrix is not symmetric");
        }
        if let Definiteness::Negative { .. } = linalg::pivoted_ldl(&entries, &Rational::zero())?.outcome {
            bail!(Validation, "covariance matrix is not positive semidefinite");
        }
        Ok(CovarianceMatrix { entries })
    }

    pub fn identity(k: usize) -> Self {
        CovarianceMatrix { entries: linalg::identity(k) }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &Matrix<Rational> {
        &self.entries
    }
}

/// Rates `λ_i > 0` and jumps `α_i` of a multidimensional free Poisson law.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSpec {
    rates: Vec<Rational>,
    jumps: Vec<Rational>,
}

impl PoissonSpec {
    pub fn new(rates: Vec<Rational>, jumps: Vec<Rational>) -> Result<Self> {
        if rates.is_empty() || rates.len() != jumps.len() {
            bail!(Validation, "need one jump per rate and at least one index");
        }
        if rates.iter().any(|r| !r.is_positive()) {
            bail!(Validation, "rates must be positive");
        }
        Ok(PoissonSpec { rates, jumps })
    }

    /// Rates only, for compound laws whose jumps come from a base distribution.
    pub fn from_rates(rates: Vec<Rational>) -> Result<Self> {
        let jumps = vec![rat(1); rates.len()];
        Self::new(rates, jumps)
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rates(&self) -> &[Rational] {
        &self.rates
    }

    pub fn jumps(&self) -> &[Rational] {
        &self.jumps
    }

    /// `sup λ_i`, finite because the index list is finite.
    pub fn sup_rate(&self) -> Rational {
        self.rates.iter().max().cloned().unwrap()
    }

    pub fn total_rate(&self) -> Rational {
        self.rates.iter().fold(Rational::zero(), |a, b| a + b)
    }

    /// Smallest admissible `N` for a projection family under `model`.
    pub fn min_rows(&self, model: ProjectionModel) -> u64 {
        let bound = match model {
            ProjectionModel::Orthogonal => self.total_rate(),
            _ => self.sup_rate(),
        };
        bound.ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(1)
    }
}

/// Canonical joint laws for a family of projections with traces `λ_i / N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionModel {
    /// One projection shared by every index (all rates equal).
    Equal,
    /// Mutually orthogonal projections (`Σ λ_i ≤ N`).
    Orthogonal,
    /// Freely independent projections.
    Free,
}

impl std::str::FromStr for ProjectionModel {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(ProjectionModel::Equal),
            "orthogonal" => Ok(ProjectionModel::Orthogonal),
            "free" => Ok(ProjectionModel::Free),
            other => bail!(Validation, "unknown projection model {:?}", other),
        }
    }
}

/// Semicircle of radius `r`: `κ₂ = r²/4`, every other cumulant zero.
pub fn semicircle(radius: &Rational, order: usize) -> Result<CumulantFunctional> {
    if radius.is_negative() {
        bail!(Validation, "radius must be nonnegative");
    }
    let variance = radius * radius / rat(4);
    CumulantFunctional::from_fn(vec!["s".into()], order, |w| if w.len() == 2 { variance.clone() } else { rat(0) })
}

/// Semicircular family: `κ(w) = c_{w₁w₂}` on words of length 2, zero otherwise.
pub fn semicircle_family(cov: &CovarianceMatrix, order: usize) -> Result<CumulantFunctional> {
    CumulantFunctional::from_fn(indexed("s", cov.dim()), order, |w| {
        if w.len() == 2 {
            cov.get(w.letters()[0], w.letters()[1]).clone()
        } else {
            rat(0)
        }
    })
}

/// Free Poisson law with rate `λ` and jump size `α`: `κ_n = λαⁿ`.
pub fn free_poisson(rate: &Rational, jump: &Rational, order: usize) -> Result<CumulantFunctional> {
    if !rate.is_positive() {
        bail!(Validation, "free Poisson rate must be positive");
    }
    CumulantFunctional::from_fn(vec!["a".into()], order, |w| rate * pow(jump, w.len()))
}

/// Compound free Poisson law: `κ(w) = λ·φ_base(w)`.
pub fn compound_free_poisson(rate: &Rational, base: &MomentFunctional, order: usize) -> Result<CumulantFunctional> {
    if !rate.is_positive() {
        bail!(Validation, "compound free Poisson rate must be positive");
    }
    if base.max_order() < order {
        bail!(Validation, "base distribution has order {} < {}", base.max_order(), order);
    }
    CumulantFunctional::from_fn(base.alphabet().to_vec(), order, |w| rate * base.moment(&w.0).unwrap())
}

/// Point mass at `α`: `φ(aⁿ) = αⁿ`.
pub fn point_mass(value: &Rational, order: usize) -> Result<MomentFunctional> {
    MomentFunctional::from_fn(vec!["a".into()], order, |w| pow(value, w.len()))
}

/// Commuting scalars `α_i`: `φ(a_w) = Π α_{w_j}`.
pub fn scalar_family(values: &[Rational], order: usize) -> Result<MomentFunctional> {
    MomentFunctional::from_fn(indexed("a", values.len()), order, |w| {
        w.letters().iter().fold(rat(1), |acc, &l| acc * &values[l])
    })
}

/// Projection with trace `t`: `φ(pⁿ) = t` for every `n ≥ 1`.
pub fn projection_functional(trace: &Rational, order: usize) -> Result<MomentFunctional> {
    if trace.is_negative() || *trace > Rational::one() {
        bail!(Validation, "projection trace must lie in [0, 1]");
    }
    MomentFunctional::from_fn(vec!["p".into()], order, |_| trace.clone())
}

/// Bernoulli element `αp + β(1-p)` with `φ(p) = t`.
pub fn bernoulli(trace: &Rational, alpha: &Rational, beta: &Rational, order: usize) -> Result<MomentFunctional> {
    if trace.is_negative() || *trace > Rational::one() {
        bail!(Validation, "Bernoulli weight must lie in [0, 1]");
    }
    let rest = Rational::one() - trace;
    MomentFunctional::from_fn(vec!["a".into()], order, |w| {
        trace * pow(alpha, w.len()) + &rest * pow(beta, w.len())
    })
}

/// Joint law of projections `p⁽ⁱ⁾` with traces `λ_i / N` under a canonical model.
pub fn projection_family(spec: &PoissonSpec, model: ProjectionModel, rows: u64, order: usize) -> Result<MomentFunctional> {
    if rows == 0 {
        bail!(Validation, "N must be positive");
    }
    let n = rat(rows as i64);
    if spec.sup_rate() > n {
        bail!(Validation, "N = {} is below sup λ = {}", rows, spec.sup_rate());
    }
    let traces: Vec<Rational> = spec.rates().iter().map(|l| l / &n).collect();
    let names = indexed("p", spec.len());
    match model {
        ProjectionModel::Equal => {
            if spec.rates().iter().any(|r| r != &spec.rates()[0]) {
                bail!(Validation, "the equal model needs identical rates");
            }
            MomentFunctional::from_fn(names, order, |_| traces[0].clone())
        }
        ProjectionModel::Orthogonal => {
            if spec.total_rate() > n {
                bail!(Validation, "orthogonal projections need Σλ_i = {} ≤ N = {}", spec.total_rate(), rows);
            }
            MomentFunctional::from_fn(names, order, |w| {
                let first = w.letters()[0];
                if w.letters().iter().all(|&l| l == first) {
                    traces[first].clone()
                } else {
                    rat(0)
                }
            })
        }
        ProjectionModel::Free => {
            let singles: Vec<MomentFunctional> = traces
                .iter()
                .zip(&names)
                .map(|(t, name)| projection_functional(t, order)?.renamed(vec![name.clone()]))
                .collect::<Result<_>>()?;
            free_product(&singles, order)
        }
    }
}

/// Cumulants of `b_i = s_i a_i s_i` for a semicircular family `{s_i}` free from `{a_i}`:
/// `κ(w) = (Π_j c_{w_j w_{j+1}}) · c_{w_n w_1} · φ_base(w)`.
///
/// For `|w| = 1` the product is empty and the closing factor gives `c_ii φ(a_i)`.
pub fn sandwich_cumulants(cov: &CovarianceMatrix, base: &MomentFunctional, order: usize) -> Result<CumulantFunctional> {
    if cov.dim() != base.k() {
        bail!(Validation, "covariance of size {} against {} base variables", cov.dim(), base.k());
    }
    if base.max_order() < order {
        bail!(Validation, "base distribution has order {} < {}", base.max_order(), order);
    }
    CumulantFunctional::from_fn(indexed("b", base.k()), order, |w| {
        let l = w.letters();
        let mut c = cov.get(l[l.len() - 1], l[0]).clone();
        for pair in l.windows(2) {
            c *= cov.get(pair[0], pair[1]);
        }
        c * base.moment(l).unwrap()
    })
}

/// Moments of concrete matrices under the state `A ↦ tr(ρA)`.
pub fn matrix_state(matrices: &[Matrix<Rational>], density: &Matrix<Rational>, order: usize) -> Result<MomentFunctional> {
    let d = density.len();
    if matrices.is_empty() || !linalg::is_square(density) || matrices.iter().any(|m| m.len() != d || !linalg::is_square(m)) {
        bail!(Structural, "matrices and density must be square of one size");
    }
    let trace: Rational = (0..d).fold(rat(0), |acc, i| acc + &density[i][i]);
    if !trace.is_one() {
        bail!(Validation, "density must have unit trace");
    }
    MomentFunctional::from_fn(indexed("x", matrices.len()), order, |w: &Word| {
        let mut prod = density.clone();
        for &l in w.letters() {
            prod = linalg::mat_mul(&prod, &matrices[l]);
        }
        (0..d).fold(rat(0), |acc, i| acc + &prod[i][i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulant::{cumulants_to_moments, moments_to_cumulants};
    use crate::freeness::check_freeness;
    use crate::scalar::ratio;

    fn moments_of(cf: &CumulantFunctional) -> Vec<Rational> {
        let mf = cumulants_to_moments(cf);
        (1..=cf.max_order()).map(|n| mf.moment(&vec![0; n]).unwrap()).collect()
    }

    #[test]
    fn standard_semicircle_moments() {
        let cf = semicircle_family(&CovarianceMatrix::new(vec![vec![rat(1)]]).unwrap(), 6).unwrap();
        assert_eq!(moments_of(&cf), [0, 1, 0, 2, 0, 5].map(rat));
        assert_eq!(semicircle(&rat(3), 2).unwrap().cumulant(&[0, 0]).unwrap(), ratio(9, 4));
    }

    #[test]
    fn identity_covariance_is_free() {
        let cf = semicircle_family(&CovarianceMatrix::identity(2), 4).unwrap();
        assert_eq!(cf.cumulant(&[0, 1]).unwrap(), rat(0));
        let report = check_freeness(&cumulants_to_moments(&cf), &[vec![0], vec![1]], 4, &rat(0)).unwrap();
        assert!(report.is_free());
    }

    #[test]
    fn covariance_validation() {
        assert!(CovarianceMatrix::new(vec![vec![rat(1), rat(2)], vec![rat(0), rat(1)]]).is_err());
        assert!(CovarianceMatrix::new(vec![vec![rat(1), rat(2)], vec![rat(2), rat(1)]]).is_err());
    }

    #[test]
    fn free_poisson_examples() {
        assert_eq!(moments_of(&free_poisson(&rat(1), &rat(1), 4).unwrap()), [1, 2, 5, 14].map(rat));
        assert!(moments_of(&free_poisson(&rat(3), &rat(0), 4).unwrap()).iter().all(Zero::is_zero));
        assert_eq!(moments_of(&free_poisson(&rat(2), &rat(1), 2).unwrap())[1], rat(6));
        assert!(free_poisson(&rat(0), &rat(1), 2).is_err());
    }

    #[test]
    fn compound_with_point_mass_is_free_poisson() {
        let alpha = ratio(-3, 2);
        let compound = compound_free_poisson(&ratio(5, 2), &point_mass(&alpha, 6).unwrap(), 6).unwrap();
        assert_eq!(compound, free_poisson(&ratio(5, 2), &alpha, 6).unwrap());
        assert!(compound_free_poisson(&rat(1), &point_mass(&alpha, 3).unwrap(), 4).is_err());
    }

    #[test]
    fn projection_examples() {
        let t = ratio(1, 3);
        let p = projection_functional(&t, 4).unwrap();
        assert!(p.iter().all(|(_, v)| *v == t));
        let k = moments_to_cumulants(&p);
        assert_eq!(k.cumulant(&[0, 0]).unwrap(), &t - &t * &t);
        assert!(projection_functional(&rat(0), 3).unwrap().iter().all(|(_, v)| v.is_zero()));
        assert!(projection_functional(&rat(2), 3).is_err());
    }

    #[test]
    fn projection_family_models() {
        let spec = PoissonSpec::new(vec![rat(1), rat(2)], vec![rat(1), rat(1)]).unwrap();
        let orth = projection_family(&spec, ProjectionModel::Orthogonal, 10, 3).unwrap();
        assert_eq!(orth.moment(&[0, 1]).unwrap(), rat(0));
        assert_eq!(orth.moment(&[1, 1, 1]).unwrap(), ratio(2, 10));
        let free = projection_family(&spec, ProjectionModel::Free, 10, 3).unwrap();
        assert_eq!(free.moment(&[0, 1]).unwrap(), ratio(2, 100));
        assert!(projection_family(&spec, ProjectionModel::Equal, 10, 3).is_err());
        assert!(projection_family(&spec, ProjectionModel::Orthogonal, 2, 3).is_err());
        let same = PoissonSpec::new(vec![rat(2), rat(2)], vec![rat(1), rat(3)]).unwrap();
        let eq = projection_family(&same, ProjectionModel::Equal, 4, 3).unwrap();
        assert!(eq.iter().all(|(_, v)| *v == ratio(1, 2)));
    }

    #[test]
    fn sandwich_examples() {
        let base = MomentFunctional::from_fn(vec!["a1".into(), "a2".into()], 3, |w| {
            rat(w.letters().iter().map(|&l| l as i64 + 2).product::<i64>()) + ratio(w.len() as i64, 7)
        })
        .unwrap();
        let diag = CovarianceMatrix::new(vec![vec![rat(2), rat(0)], vec![rat(0), rat(3)]]).unwrap();
        let cf = sandwich_cumulants(&diag, &base, 3).unwrap();
        assert_eq!(cf.cumulant(&[0, 1]).unwrap(), rat(0));
        assert_eq!(cf.cumulant(&[1]).unwrap(), rat(3) * base.moment(&[1]).unwrap());
        let ones = CovarianceMatrix::new(vec![vec![rat(1); 2]; 2]).unwrap();
        let cf = sandwich_cumulants(&ones, &base, 3).unwrap();
        assert_eq!(cf.cumulant(&[0, 1]).unwrap(), base.moment(&[0, 1]).unwrap());
    }

    #[test]
    fn bernoulli_and_matrix_state() {
        let b = bernoulli(&ratio(1, 2), &rat(1), &rat(-1), 4).unwrap();
        let got: Vec<Rational> = (1..=4).map(|n| b.moment(&vec![0; n]).unwrap()).collect();
        assert_eq!(got, [0, 1, 0, 1].map(rat));
        let x = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
        let rho = vec![vec![ratio(1, 2), rat(0)], vec![rat(0), ratio(1, 2)]];
        let mf = matrix_state(&[x], &rho, 4).unwrap();
        assert_eq!(mf, b.renamed(vec!["x".into()]).unwrap());
    }
}

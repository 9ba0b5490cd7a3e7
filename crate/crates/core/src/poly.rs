//! Noncommutative polynomials with scalar coefficients, in linear normal form.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::cumulant::MomentFunctional;
use crate::error::Result;
use crate::scalar::{Rational, Scalar};
use crate::word::Word;

/// `Σ c_w X_w`, keyed by word; the empty word is the constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct NcPolynomial<S = Rational> {
    terms: BTreeMap<Word, S>,
}

impl<S: Scalar> NcPolynomial<S> {
    pub fn zero() -> Self {
        NcPolynomial { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(Word::empty(), c)
    }

    pub fn letter(l: usize) -> Self {
        Self::monomial(Word::new(vec![l]), S::one())
    }

    pub fn monomial(w: Word, c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    pub fn add_term(&mut self, w: Word, c: S) {
        let entry = self.terms.entry(w).or_insert_with(S::zero);
        *entry = entry.clone() + c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.clone() * c.clone());
        }
        out
    }

    /// Linear extension of a moment oracle (`φ(1) = 1`).
    pub fn evaluate(&self, moment: &mut dyn FnMut(&Word) -> Result<S>) -> Result<S> {
        let mut acc = S::zero();
        for (w, c) in &self.terms {
            let m = if w.is_empty() { S::one() } else { moment(w)? };
            acc = acc + c.clone() * m;
        }
        Ok(acc)
    }
}

impl<S: Scalar> Add for &NcPolynomial<S> {
    type Output = NcPolynomial<S>;
    fn add(self, rhs: Self) -> NcPolynomial<S> {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &NcPolynomial<S> {
    type Output = NcPolynomial<S>;
    fn sub(self, rhs: Self) -> NcPolynomial<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Neg for &NcPolynomial<S> {
    type Output = NcPolynomial<S>;
    fn neg(self) -> NcPolynomial<S> {
        self.scale(&(-S::one()))
    }
}

impl<S: Scalar> Mul for &NcPolynomial<S> {
    type Output = NcPolynomial<S>;
    fn mul(self, rhs: Self) -> NcPolynomial<S> {
        let mut out = NcPolynomial::zero();
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a.clone() * b.clone());
            }
        }
        out
    }
}

/// Joint moments of new variables given as polynomials in the letters of `mf`.
///
/// The moment of a word in the new variables is the linear extension of `φ`
/// over the expanded product of the corresponding polynomials.
pub fn substitute<S: Scalar>(
    mf: &MomentFunctional<S>,
    names: Vec<String>,
    polys: &[NcPolynomial<S>],
    order: usize,
) -> Result<MomentFunctional<S>> {
    let mut first_error = None;
    let out = MomentFunctional::from_fn(names, order, |w| {
        let mut product = NcPolynomial::constant(S::one());
        for &l in w.letters() {
            product = &product * &polys[l];
        }
        match product.evaluate(&mut |word| mf.moment(&word.0)) {
            Ok(v) => v,
            Err(e) => {
                first_error.get_or_insert(e);
                S::zero()
            }
        }
    })?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn product_is_concatenation() {
        let x = NcPolynomial::<Rational>::letter(0);
        let y = NcPolynomial::<Rational>::letter(1);
        let p = &(&x + &y) * &(&x - &y);
        let expect: Vec<(Word, Rational)> = vec![
            (Word::new(vec![0, 0]), rat(1)),
            (Word::new(vec![0, 1]), rat(-1)),
            (Word::new(vec![1, 0]), rat(1)),
            (Word::new(vec![1, 1]), rat(-1)),
        ];
        let got: Vec<(Word, Rational)> = p.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
        assert_eq!(got, expect);
        assert_eq!(p.degree(), 2);
        assert!((&p - &p).is_zero());
    }
}

//! Joint distributions as word-indexed tables and the moment–cumulant transforms.
//!
//! A [`MomentFunctional`] stores `φ(a_{i(1)}⋯a_{i(n)})` for every word up to a
//! fixed order (the empty word is implicitly 1); a [`CumulantFunctional`]
//! stores `κ_n(a_{i(1)},…,a_{i(n)})` on the same index set. The forward
//! transform is the Möbius sum over NC(n); the inverse sums `κ_π` over NC(n).

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{bail, Result};
use crate::nc::{mobius_to_top, nc_cached, NcPartition};
use crate::scalar::{Rational, Scalar};
use crate::word::{Word, WordTable};

fn validate_alphabet(alphabet: &[String]) -> Result<()> {
    if alphabet.is_empty() {
        bail!(Structural, "alphabet must be non-empty");
    }
    for (i, name) in alphabet.iter().enumerate() {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            bail!(Structural, "invalid variable name {:?}", name);
        }
        if alphabet[..i].contains(name) {
            bail!(Structural, "duplicate variable name {:?}", name);
        }
    }
    Ok(())
}

/// A unital joint distribution truncated at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunctional<S = Rational> {
    alphabet: Vec<String>,
    table: WordTable<S>,
}

/// Free cumulants of a joint distribution truncated at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantFunctional<S = Rational> {
    alphabet: Vec<String>,
    table: WordTable<S>,
}

macro_rules! functional_common {
    ($ty:ident) => {
        impl<S: Scalar> $ty<S> {
            pub fn new(alphabet: Vec<String>, table: WordTable<S>) -> Result<Self> {
                validate_alphabet(&alphabet)?;
                if table.k() != alphabet.len() {
                    bail!(
                        Structural,
                        "table over {} letters does not match an alphabet of {}",
                        table.k(),
                        alphabet.len()
                    );
                }
                Ok($ty { alphabet, table })
            }

            pub fn from_fn(alphabet: Vec<String>, order: usize, f: impl FnMut(&Word) -> S) -> Result<Self> {
                validate_alphabet(&alphabet)?;
                let table = WordTable::from_fn(alphabet.len(), order, f)?;
                Ok($ty { alphabet, table })
            }

            pub fn zero(alphabet: Vec<String>, order: usize) -> Result<Self> {
                Self::from_fn(alphabet, order, |_| S::zero())
            }

            pub fn alphabet(&self) -> &[String] {
                &self.alphabet
            }

            pub fn k(&self) -> usize {
                self.alphabet.len()
            }

            pub fn max_order(&self) -> usize {
                self.table.order()
            }

            pub fn table(&self) -> &WordTable<S> {
                &self.table
            }

            pub fn iter(&self) -> impl Iterator<Item = (Word, &S)> {
                self.table.iter()
            }

            /// Restriction to words of length at most `order`.
            pub fn truncate(&self, order: usize) -> Self {
                $ty { alphabet: self.alphabet.clone(), table: self.table.truncate(order) }
            }

            /// Lossy promotion to floating point.
            pub fn to_f64(&self) -> $ty<f64> {
                $ty { alphabet: self.alphabet.clone(), table: self.table.map(|v| v.to_f64()) }
            }

            /// Same table under new variable names.
            pub fn renamed(&self, names: Vec<String>) -> Result<Self> {
                Self::new(names, self.table.clone())
            }

            /// Index of a variable by name.
            pub fn letter(&self, name: &str) -> Option<usize> {
                self.alphabet.iter().position(|a| a == name)
            }

            /// Parses a space-separated word of variable names.
            pub fn parse_word(&self, text: &str) -> Result<Word> {
                text.split_whitespace()
                    .map(|name| match self.letter(name) {
                        Some(l) => Ok(l),
                        None => bail!(Structural, "unknown variable {:?}", name),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Word)
            }
        }
    };
}

functional_common!(MomentFunctional);
functional_common!(CumulantFunctional);

impl<S: Scalar> MomentFunctional<S> {
    /// `φ(word)`; the empty word has moment 1.
    pub fn moment(&self, word: &[usize]) -> Result<S> {
        if word.is_empty() {
            return Ok(S::one());
        }
        match self.table.get(word) {
            Some(v) => Ok(v.clone()),
            None => bail!(
                Structural,
                "word {} outside alphabet of {} letters / order {}",
                Word::new(word.to_vec()),
                self.k(),
                self.max_order()
            ),
        }
    }

    /// Words whose reversal has a different moment (self-adjointness with real values).
    pub fn hermitian_violations(&self, tolerance: &S) -> Vec<Word> {
        self.iter()
            .filter(|(w, v)| {
                let r = self.table.get(&w.reversed().0).unwrap();
                (r.clone() - (*v).clone()).abs_val() > *tolerance
            })
            .map(|(w, _)| w)
            .collect()
    }

    /// Words `uv` with `φ(uv) ≠ φ(vu)`, reported as the unrotated word.
    pub fn tracial_violations(&self, tolerance: &S) -> Vec<Word> {
        self.iter()
            .filter(|(w, v)| {
                let mut rot = w.0.clone();
                rot.rotate_left(1);
                let r = self.table.get(&rot).unwrap();
                (r.clone() - (*v).clone()).abs_val() > *tolerance
            })
            .map(|(w, _)| w)
            .collect()
    }

    pub fn is_tracial(&self) -> bool {
        self.tracial_violations(&S::zero()).is_empty()
    }
}

impl<S: Scalar> CumulantFunctional<S> {
    /// `κ_{|w|}(a_w)`; undefined on the empty word.
    pub fn cumulant(&self, word: &[usize]) -> Result<S> {
        if word.is_empty() {
            bail!(Domain, "free cumulants are not defined on the empty word");
        }
        match self.table.get(word) {
            Some(v) => Ok(v.clone()),
            None => bail!(
                Structural,
                "word {} outside alphabet of {} letters / order {}",
                Word::new(word.to_vec()),
                self.k(),
                self.max_order()
            ),
        }
    }

    /// Word-wise scaling `κ ↦ c·κ`.
    pub fn scaled(&self, c: &S) -> Self {
        CumulantFunctional { alphabet: self.alphabet.clone(), table: self.table.map(|v| v.clone() * c.clone()) }
    }

    /// Word-wise sum of two cumulant tables on the same alphabet.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.alphabet != other.alphabet || self.max_order() != other.max_order() {
            bail!(Structural, "cumulant tables differ in alphabet or order");
        }
        let values: Vec<S> =
            self.table.values().iter().zip(other.table.values()).map(|(a, b)| a.clone() + b.clone()).collect();
        let mut it = values.into_iter();
        let table = WordTable::from_fn(self.k(), self.max_order(), |_| it.next().unwrap())?;
        Ok(CumulantFunctional { alphabet: self.alphabet.clone(), table })
    }
}

/// Partition blocks for NC(n), cached alongside the Möbius values.
struct LatticeData {
    blocks: Vec<Vec<Vec<usize>>>,
    mobius: Vec<i64>,
}

fn lattice_data(n: usize) -> LatticeData {
    let parts = nc_cached(n);
    LatticeData { blocks: parts.iter().map(|p| p.blocks()).collect(), mobius: mobius_to_top(n).to_vec() }
}

fn check_partition_len(word: &[usize], pi: &NcPartition) -> Result<()> {
    if word.len() != pi.n() {
        bail!(Structural, "word of length {} against a partition of [{}]", word.len(), pi.n());
    }
    Ok(())
}

/// `φ_π(w)`: product over the blocks of `π` of the moment of the sub-word.
pub fn phi_pi<S: Scalar>(mf: &MomentFunctional<S>, word: &Word, pi: &NcPartition) -> Result<S> {
    check_partition_len(&word.0, pi)?;
    let mut acc = S::one();
    for block in pi.blocks() {
        acc = acc * mf.moment(&word.subword(&block).0)?;
    }
    Ok(acc)
}

/// `κ_π(w)`: product over the blocks of `π` of the cumulant of the sub-word.
pub fn kappa_pi<S: Scalar>(cf: &CumulantFunctional<S>, word: &Word, pi: &NcPartition) -> Result<S> {
    check_partition_len(&word.0, pi)?;
    let mut acc = S::one();
    for block in pi.blocks() {
        acc = acc * cf.cumulant(&word.subword(&block).0)?;
    }
    Ok(acc)
}

fn block_product<S: Scalar>(table: &WordTable<S>, word: &[usize], blocks: &[Vec<usize>], buf: &mut Vec<usize>) -> S {
    let mut acc = S::one();
    for block in blocks {
        buf.clear();
        buf.extend(block.iter().map(|&p| word[p]));
        let v = table.get(buf).expect("sub-word inside table");
        if v.is_zero() {
            return S::zero();
        }
        acc = acc * v.clone();
    }
    acc
}

/// Applies `f` to every word of each length, in parallel within a length.
fn transform_table<S: Scalar>(
    k: usize,
    order: usize,
    f: impl Fn(&[usize], &LatticeData, &mut Vec<usize>) -> S + Sync,
) -> Result<WordTable<S>> {
    let mut values: Vec<S> = Vec::new();
    for n in 1..=order {
        let data = lattice_data(n);
        let words: Vec<Word> = crate::word::words_of_length(k, n).collect();
        let chunk: Vec<S> = words
            .par_iter()
            .map_init(Vec::new, |buf, w| f(&w.0, &data, buf))
            .collect();
        values.extend(chunk);
    }
    let mut it = values.into_iter();
    WordTable::from_fn(k, order, |_| it.next().unwrap())
}

/// `κ(w) = Σ_{π∈NC(n)} φ_π(w) μ(π, 1_n)` evaluated term by term over the lattice.
pub fn moments_to_cumulants_by_mobius<S: Scalar>(mf: &MomentFunctional<S>) -> CumulantFunctional<S> {
    let table = &mf.table;
    let out = transform_table(mf.k(), mf.max_order(), |w, data, buf| {
        let mut acc = S::zero();
        for (blocks, &mu) in data.blocks.iter().zip(&data.mobius) {
            let term = block_product(table, w, blocks, buf);
            if !term.is_zero() {
                acc = acc + term * S::from_i64(mu);
            }
        }
        acc
    })
    .expect("same shape as the input table");
    CumulantFunctional { alphabet: mf.alphabet.clone(), table: out }
}

/// `φ(w) = Σ_{π∈NC(n)} κ_π(w)` evaluated term by term over the lattice.
pub fn cumulants_to_moments_by_partitions<S: Scalar>(cf: &CumulantFunctional<S>) -> MomentFunctional<S> {
    let table = &cf.table;
    let out = transform_table(cf.k(), cf.max_order(), |w, data, buf| {
        let mut acc = S::zero();
        for blocks in &data.blocks {
            acc = acc + block_product(table, w, blocks, buf);
        }
        acc
    })
    .expect("same shape as the input table");
    MomentFunctional { alphabet: cf.alphabet.clone(), table: out }
}

/// `Σ_{V∋0} κ(w_V) Π_gaps φ(gap)`, the lattice sum grouped by the block of the
/// first position. The gaps of `V` are contiguous and shorter than `w`, so both
/// tables only need entries for shorter words; `skip_full` leaves out `V = [n]`.
fn first_block_sum<S: Scalar>(
    w: &[usize],
    kappa: &WordTable<S>,
    moments: &WordTable<S>,
    skip_full: bool,
    buf: &mut Vec<usize>,
) -> S {
    let n = w.len();
    let full: u64 = (1u64 << (n - 1)) - 1;
    let mut acc = S::zero();
    for mask in 0..=full {
        if skip_full && mask == full {
            continue;
        }
        buf.clear();
        buf.push(w[0]);
        let mut prod = S::one();
        let mut last = 0;
        for p in 1..n {
            if mask >> (p - 1) & 1 == 1 {
                if p > last + 1 {
                    prod = prod * moments.get(&w[last + 1..p]).expect("gap inside table").clone();
                    if prod.is_zero() {
                        break;
                    }
                }
                buf.push(w[p]);
                last = p;
            }
        }
        if prod.is_zero() {
            continue;
        }
        if last + 1 < n {
            prod = prod * moments.get(&w[last + 1..]).expect("gap inside table").clone();
        }
        if prod.is_zero() {
            continue;
        }
        let k = kappa.get(buf).expect("block inside table");
        if !k.is_zero() {
            acc = acc + k.clone() * prod;
        }
    }
    acc
}

/// Fills the unknown table length by length; `forward` solves for cumulants.
fn recursive_transform<S: Scalar>(
    k: usize,
    order: usize,
    other: WordTable<S>,
    forward: bool,
) -> Result<WordTable<S>> {
    let mut fill = WordTable::filled(k, order, S::zero())?;
    for n in 1..=order {
        let words: Vec<Word> = crate::word::words_of_length(k, n).collect();
        let (kappa, moments) = if forward { (&fill, &other) } else { (&other, &fill) };
        let values: Vec<S> = words
            .par_iter()
            .map_init(Vec::new, |buf, w| {
                let rest = first_block_sum(&w.0, kappa, moments, forward, buf);
                if forward {
                    moments.get(&w.0).unwrap().clone() - rest
                } else {
                    rest
                }
            })
            .collect();
        for (w, v) in words.iter().zip(values) {
            fill.set(&w.0, v)?;
        }
    }
    Ok(fill)
}

/// Free cumulants of every word up to the table order.
///
/// Solves `φ(w) = Σ_{V∋0} κ(w_V) Π_gaps φ(gap)` for `κ(w)`, which is the lattice
/// sum `Σ_π κ_π(w)` grouped by the block of the first position; agrees exactly
/// with [`moments_to_cumulants_by_mobius`].
pub fn moments_to_cumulants<S: Scalar>(mf: &MomentFunctional<S>) -> CumulantFunctional<S> {
    let table = recursive_transform(mf.k(), mf.max_order(), mf.table.clone(), true).expect("same shape as the input table");
    CumulantFunctional { alphabet: mf.alphabet.clone(), table }
}

/// Moments of every word up to the table order, via the same first-block grouping
/// of `Σ_{π∈NC(n)} κ_π(w)`.
pub fn cumulants_to_moments<S: Scalar>(cf: &CumulantFunctional<S>) -> MomentFunctional<S> {
    let table = recursive_transform(cf.k(), cf.max_order(), cf.table.clone(), false).expect("same shape as the input table");
    MomentFunctional { alphabet: cf.alphabet.clone(), table }
}

/// Moment of a single word from a cumulant oracle, without materialising tables.
///
/// Groups `Σ_{π∈NC(n)} κ_π(w)` by the block containing the first position: the
/// gaps that block leaves are contiguous and independent, so moments of
/// contiguous sub-words are memoized. Zero cumulants prune the search.
pub fn moment_from_cumulants<S: Scalar>(word: &[usize], kappa: &mut dyn FnMut(&[usize]) -> Result<S>) -> Result<S> {
    struct Ctx<'a, S> {
        word: &'a [usize],
        kappa: &'a mut dyn FnMut(&[usize]) -> Result<S>,
        memo: HashMap<(usize, usize), S>,
    }

    fn interval<S: Scalar>(ctx: &mut Ctx<'_, S>, a: usize, b: usize) -> Result<S> {
        if a >= b {
            return Ok(S::one());
        }
        if let Some(v) = ctx.memo.get(&(a, b)) {
            return Ok(v.clone());
        }
        let mut total = S::zero();
        let mut chosen = vec![a];
        extend(ctx, a, b, &mut chosen, S::one(), &mut total)?;
        ctx.memo.insert((a, b), total.clone());
        Ok(total)
    }

    fn extend<S: Scalar>(
        ctx: &mut Ctx<'_, S>,
        last: usize,
        b: usize,
        chosen: &mut Vec<usize>,
        prod: S,
        total: &mut S,
    ) -> Result<()> {
        // Close the block here: the tail after `last` is one gap.
        let tail = interval(ctx, last + 1, b)?;
        if !tail.is_zero() {
            let letters: Vec<usize> = chosen.iter().map(|&p| ctx.word[p]).collect();
            let k = (ctx.kappa)(&letters)?;
            if !k.is_zero() {
                *total = total.clone() + k * prod.clone() * tail;
            }
        }
        for next in last + 1..b {
            let gap = interval(ctx, last + 1, next)?;
            if gap.is_zero() {
                continue;
            }
            chosen.push(next);
            extend(ctx, next, b, chosen, prod.clone() * gap, total)?;
            chosen.pop();
        }
        Ok(())
    }

    let mut ctx = Ctx { word, kappa, memo: HashMap::new() };
    interval(&mut ctx, 0, word.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn single(order: usize, moments: &[i64]) -> MomentFunctional {
        MomentFunctional::from_fn(vec!["a".into()], order, |w| rat(moments[w.len() - 1])).unwrap()
    }

    #[test]
    fn recursion_matches_lattice_sums() {
        let mut seed: i64 = 7;
        let mf = MomentFunctional::from_fn(vec!["x".into(), "y".into(), "z".into()], 5, |_| {
            seed = (seed * 1103515245 + 12345) % 2147483648;
            ratio(seed % 13 - 6, seed % 5 + 1)
        })
        .unwrap();
        let cf = moments_to_cumulants(&mf);
        assert_eq!(cf, moments_to_cumulants_by_mobius(&mf));
        assert_eq!(cumulants_to_moments(&cf), cumulants_to_moments_by_partitions(&cf));
        assert_eq!(cumulants_to_moments(&cf), mf);
    }

    #[test]
    fn first_cumulant_is_mean_and_second_is_variance() {
        let mf = MomentFunctional::from_fn(vec!["a".into()], 2, |w| if w.len() == 1 { ratio(1, 3) } else { ratio(1, 2) })
            .unwrap();
        let cf = moments_to_cumulants(&mf);
        assert_eq!(cf.cumulant(&[0]).unwrap(), ratio(1, 3));
        assert_eq!(cf.cumulant(&[0, 0]).unwrap(), ratio(1, 2) - ratio(1, 9));
    }

    #[test]
    fn semicircle_moments_give_delta_cumulants() {
        let cf = moments_to_cumulants(&single(6, &[0, 1, 0, 2, 0, 5]));
        let got: Vec<Rational> = (1..=6).map(|n| cf.cumulant(&vec![0; n]).unwrap()).collect();
        assert_eq!(got, vec![rat(0), rat(1), rat(0), rat(0), rat(0), rat(0)]);
    }

    #[test]
    fn unit_cumulants_give_catalan_moments() {
        let cf = CumulantFunctional::from_fn(vec!["a".into()], 4, |_| rat(1)).unwrap();
        let mf = cumulants_to_moments(&cf);
        let got: Vec<Rational> = (1..=4).map(|n| mf.moment(&vec![0; n]).unwrap()).collect();
        assert_eq!(got, vec![rat(1), rat(2), rat(5), rat(14)]);
    }

    #[test]
    fn zero_cumulants_give_zero_moments() {
        let cf = CumulantFunctional::<Rational>::zero(vec!["a".into(), "b".into()], 4).unwrap();
        let mf = cumulants_to_moments(&cf);
        assert!(mf.iter().all(|(_, v)| v == &rat(0)));
        assert_eq!(mf.moment(&[]).unwrap(), rat(1));
    }

    #[test]
    fn phi_pi_and_kappa_pi_examples() {
        let names = vec!["a1".to_string(), "a2".to_string()];
        let mf = MomentFunctional::from_fn(names.clone(), 4, |w| rat(w.0.iter().map(|&l| l as i64 + 2).product()))
            .unwrap();
        let w = Word::new(vec![0, 1, 1, 0]);
        let nested = NcPartition::from_blocks(4, &[vec![0, 3], vec![1, 2]]).unwrap();
        assert_eq!(phi_pi(&mf, &w, &nested).unwrap(), mf.moment(&[0, 0]).unwrap() * mf.moment(&[1, 1]).unwrap());
        assert_eq!(phi_pi(&mf, &w, &NcPartition::top(4)).unwrap(), mf.moment(&w.0).unwrap());
        assert_eq!(phi_pi(&mf, &w, &NcPartition::bottom(4)).unwrap(), rat(2 * 3 * 3 * 2));
        assert!(phi_pi(&mf, &w, &NcPartition::top(3)).is_err());

        let cf = CumulantFunctional::from_fn(names, 3, |w| rat(w.len() as i64 + 1)).unwrap();
        let w3 = Word::new(vec![0, 0, 0]);
        let outer = NcPartition::from_blocks(3, &[vec![0, 2], vec![1]]).unwrap();
        assert_eq!(kappa_pi(&cf, &w3, &outer).unwrap(), rat(3) * rat(2));
        assert_eq!(kappa_pi(&cf, &w3, &NcPartition::top(3)).unwrap(), rat(4));
    }

    #[test]
    fn recursive_moment_matches_enumeration() {
        let names = vec!["x".to_string(), "y".to_string()];
        let cf = CumulantFunctional::from_fn(names, 6, |w| {
            ratio(w.0.iter().map(|&l| l as i64 * 2 + 1).sum::<i64>(), w.len() as i64 + 1)
        })
        .unwrap();
        let mf = cumulants_to_moments(&cf);
        for (w, v) in mf.iter() {
            let rec = moment_from_cumulants(&w.0, &mut |l: &[usize]| cf.cumulant(l)).unwrap();
            assert_eq!(&rec, v, "word {}", w);
        }
    }

    #[test]
    fn tracial_and_hermitian_flags() {
        let mf = MomentFunctional::from_fn(vec!["a".into(), "b".into()], 2, |w| {
            if w.0 == [0, 1] { rat(1) } else { rat(0) }
        })
        .unwrap();
        assert!(!mf.is_tracial());
        assert_eq!(mf.hermitian_violations(&rat(0)), vec![Word::new(vec![0, 1]), Word::new(vec![1, 0])]);
    }

    #[test]
    fn empty_word_cumulant_is_domain_error() {
        let cf = CumulantFunctional::<Rational>::zero(vec!["a".into()], 2).unwrap();
        assert!(matches!(cf.cumulant(&[]), Err(crate::Error::Domain(_))));
    }
}

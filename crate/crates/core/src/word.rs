//! Words over a finite alphabet and dense word-indexed tables.

use std::fmt;

use crate::error::{bail, Result};

/// An ordered list of letter indices (0-based into an alphabet).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: impl Into<Vec<usize>>) -> Self {
        Word(letters.into())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Letters at the given positions, in position order.
    pub fn subword(&self, positions: &[usize]) -> Word {
        Word(positions.iter().map(|&p| self.0[p]).collect())
    }

    /// Space-separated rendering with the given variable names.
    pub fn render(&self, names: &[String]) -> String {
        self.0.iter().map(|&l| names[l].as_str()).collect::<Vec<_>>().join(" ")
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| (l + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Number of words of length `1..=order` over `k` letters.
pub fn count_words(k: usize, order: usize) -> usize {
    let mut total = 0usize;
    let mut pow = 1usize;
    for _ in 0..order {
        pow *= k;
        total += pow;
    }
    total
}

/// All words of exactly `len` letters over `k` letters, lexicographic.
pub fn words_of_length(k: usize, len: usize) -> impl Iterator<Item = Word> {
    let total = k.checked_pow(len as u32).unwrap_or(0);
    let total = if len == 0 { 1 } else { total };
    (0..total).map(move |mut r| {
        let mut letters = vec![0usize; len];
        for pos in (0..len).rev() {
            letters[pos] = r % k;
            r /= k;
        }
        Word(letters)
    })
}

/// All words of length `1..=order`, by length then lexicographic.
pub fn words_up_to(k: usize, order: usize) -> impl Iterator<Item = Word> {
    (1..=order).flat_map(move |len| words_of_length(k, len))
}

/// Dense storage of one value per non-empty word of length at most `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTable<S> {
    k: usize,
    order: usize,
    values: Vec<S>,
}

impl<S: Clone> WordTable<S> {
    /// Capacity guard: dense tables beyond this many entries are refused.
    pub const MAX_ENTRIES: usize = 1 << 26;

    pub fn filled(k: usize, order: usize, value: S) -> Result<Self> {
        if k == 0 {
            bail!(Structural, "alphabet must be non-empty");
        }
        let size = checked_count(k, order)?;
        Ok(WordTable { k, order, values: vec![value; size] })
    }

    pub fn from_fn(k: usize, order: usize, mut f: impl FnMut(&Word) -> S) -> Result<Self> {
        if k == 0 {
            bail!(Structural, "alphabet must be non-empty");
        }
        checked_count(k, order)?;
        let values = words_up_to(k, order).map(|w| f(&w)).collect();
        Ok(WordTable { k, order, values })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index_of(&self, letters: &[usize]) -> Option<usize> {
        let len = letters.len();
        if len == 0 || len > self.order {
            return None;
        }
        let mut offset = 0usize;
        let mut pow = 1usize;
        for _ in 1..len {
            pow *= self.k;
            offset += pow;
        }
        let mut rank = 0usize;
        for &l in letters {
            if l >= self.k {
                return None;
            }
            rank = rank * self.k + l;
        }
        Some(offset + rank)
    }

    pub fn get(&self, letters: &[usize]) -> Option<&S> {
        self.index_of(letters).map(|i| &self.values[i])
    }

    pub fn set(&mut self, letters: &[usize], value: S) -> Result<()> {
        match self.index_of(letters) {
            Some(i) => {
                self.values[i] = value;
                Ok(())
            }
            None => bail!(Structural, "word {:?} outside the table", letters),
        }
    }

    /// (word, value) pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, &S)> {
        words_up_to(self.k, self.order).zip(self.values.iter())
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn map<T: Clone>(&self, f: impl Fn(&S) -> T) -> WordTable<T> {
        WordTable { k: self.k, order: self.order, values: self.values.iter().map(f).collect() }
    }

    /// Restriction to words of length at most `order`.
    pub fn truncate(&self, order: usize) -> WordTable<S> {
        let order = order.min(self.order);
        let size = count_words(self.k, order);
        WordTable { k: self.k, order, values: self.values[..size].to_vec() }
    }
}

fn checked_count(k: usize, order: usize) -> Result<usize> {
    let mut total = 0usize;
    let mut pow = 1usize;
    for _ in 0..order {
        pow = match pow.checked_mul(k) {
            Some(p) => p,
            None => bail!(Capacity, "word table over {} letters at order {} is too large", k, order),
        };
        total += pow;
    }
    if total > WordTable::<()>::MAX_ENTRIES {
        bail!(Capacity, "word table over {} letters at order {} has {} entries", k, order, total);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_dense_and_ordered() {
        let t = WordTable::from_fn(2, 3, |w| w.clone()).unwrap();
        assert_eq!(t.values().len(), 2 + 4 + 8);
        for (i, (w, v)) in t.iter().enumerate() {
            assert_eq!(&w, v);
            assert_eq!(t.index_of(w.letters()), Some(i));
        }
        assert_eq!(t.index_of(&[]), None);
        assert_eq!(t.index_of(&[0, 0, 0, 0]), None);
        assert_eq!(t.index_of(&[2]), None);
    }

    #[test]
    fn word_helpers() {
        let w = Word::new(vec![0, 1, 1, 0, 2]);
        assert_eq!(w.reversed(), Word::new(vec![2, 0, 1, 1, 0]));
        assert_eq!(w.subword(&[0, 3]), Word::new(vec![0, 0]));
        assert_eq!(w.to_string(), "(1,2,2,1,3)");
    }

    #[test]
    fn oversized_tables_refused() {
        assert!(matches!(WordTable::filled(64, 10, 0u8), Err(crate::Error::Capacity(_))));
    }
}

//! The lattice NC(n) of non-crossing partitions.
//!
//! Partitions are stored as restricted-growth label strings packed four bits
//! per element into a `u64`, so `NcPartition` is `Copy` and hashes cheaply.
//! Element positions are 0-based in the API and 1-based in `Display`.
//!
//! Enumeration splits off the block containing the first element: the gaps
//! between consecutive elements of that block (and the tail after its last
//! element) are independent non-crossing sub-problems. Generating first
//! blocks in lexicographic order and the gap partitions in nested order
//! yields NC(n) sorted lexicographically on the canonical block
//! serialization.
//!
//! The Möbius function is obtained by inverting ζ over intervals. An interval
//! `[π, σ]` factors over the blocks of `σ`, so values are memoized on the
//! relabelled restriction `π|V` and computed by the recursion
//! `μ(π, 1) = -Σ_{π < ρ ≤ 1} μ(ρ, 1)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::error::{bail, Result};

/// Largest ground-set size the packed representation supports.
pub const MAX_ORDER: usize = 16;

/// Default enumeration cap (C₁₅ ≈ 9.7 million partitions).
pub const DEFAULT_ORDER_CAP: usize = 15;

/// A non-crossing partition of `{0, …, n-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcPartition {
    n: u8,
    labels: u64,
}

/// A value of the Möbius function of NC(n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MobiusValue(pub i64);

fn get_label(labels: u64, i: usize) -> usize {
    ((labels >> (4 * i)) & 0xf) as usize
}

fn pack(labels: &[u8]) -> u64 {
    labels
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &l)| acc | ((l as u64) << (4 * i)))
}

/// Checks that `blocks` is a set partition of `{0, …, n-1}`.
fn validate_set_partition(n: usize, blocks: &[Vec<usize>]) -> Result<()> {
    if n == 0 {
        bail!(Structural, "ground set must be non-empty");
    }
    let mut seen = vec![false; n];
    for block in blocks {
        if block.is_empty() {
            bail!(Structural, "empty block");
        }
        for &e in block {
            if e >= n {
                bail!(Structural, "element {} outside [1, {}]", e + 1, n);
            }
            if seen[e] {
                bail!(Structural, "element {} appears in two blocks", e + 1);
            }
            seen[e] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        bail!(Structural, "element {} is not covered", missing + 1);
    }
    Ok(())
}

fn crossing_in_labels(labels: &[usize]) -> bool {
    let n = labels.len();
    // p1 < q1 < p2 < q2 with p's in one block and q's in another.
    for p1 in 0..n {
        for q1 in p1 + 1..n {
            if labels[q1] == labels[p1] {
                continue;
            }
            for p2 in q1 + 1..n {
                if labels[p2] != labels[p1] {
                    continue;
                }
                for q2 in p2 + 1..n {
                    if labels[q2] == labels[q1] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Decides whether a set partition of `{0, …, n-1}` is non-crossing.
pub fn is_noncrossing(n: usize, blocks: &[Vec<usize>]) -> Result<bool> {
    validate_set_partition(n, blocks)?;
    let mut labels = vec![0usize; n];
    for (b, block) in blocks.iter().enumerate() {
        for &e in block {
            labels[e] = b;
        }
    }
    Ok(!crossing_in_labels(&labels))
}

impl NcPartition {
    /// Builds a partition from its blocks, rejecting malformed or crossing input.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if n > MAX_ORDER {
            bail!(Capacity, "ground set size {} exceeds {}", n, MAX_ORDER);
        }
        if !is_noncrossing(n, blocks)? {
            bail!(Structural, "partition is crossing");
        }
        let mut raw = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                raw[e] = b;
            }
        }
        Ok(Self::from_raw_labels(&raw))
    }

    /// Normalises arbitrary block labels to restricted-growth form.
    fn from_raw_labels(raw: &[usize]) -> Self {
        let mut map: HashMap<usize, u8> = HashMap::new();
        let mut out = Vec::with_capacity(raw.len());
        for &r in raw {
            let next = map.len() as u8;
            out.push(*map.entry(r).or_insert(next));
        }
        NcPartition { n: raw.len() as u8, labels: pack(&out) }
    }

    /// `0_n`: all singletons.
    pub fn bottom(n: usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&n));
        let labels: Vec<u8> = (0..n as u8).collect();
        NcPartition { n: n as u8, labels: pack(&labels) }
    }

    /// `1_n`: a single block.
    pub fn top(n: usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&n));
        NcPartition { n: n as u8, labels: 0 }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Index of the block containing `i`; blocks are numbered by minimum element.
    pub fn block_of(&self, i: usize) -> usize {
        get_label(self.labels, i)
    }

    pub fn num_blocks(&self) -> usize {
        (0..self.n()).map(|i| self.block_of(i)).max().map_or(0, |m| m + 1)
    }

    /// Blocks sorted by minimum element, elements ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for i in 0..self.n() {
            blocks[self.block_of(i)].push(i);
        }
        blocks
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.block_of(i)).collect()
    }

    /// Refinement order: every block of `self` lies inside a block of `other`.
    pub fn leq(&self, other: &NcPartition) -> Result<bool> {
        if self.n != other.n {
            bail!(Structural, "partitions of [{}] and [{}] are not comparable", self.n, other.n);
        }
        Ok(self.leq_unchecked(other))
    }

    fn leq_unchecked(&self, other: &NcPartition) -> bool {
        let mut rep = [usize::MAX; MAX_ORDER];
        for i in 0..self.n() {
            let b = self.block_of(i);
            let target = other.block_of(i);
            if rep[b] == usize::MAX {
                rep[b] = target;
            } else if rep[b] != target {
                return false;
            }
        }
        true
    }

    /// Least upper bound inside NC(n).
    ///
    /// Starts from the set-partition join and merges crossing blocks until
    /// none remain; every merge is forced for a non-crossing upper bound.
    pub fn join(&self, other: &NcPartition) -> Result<NcPartition> {
        if self.n != other.n {
            bail!(Structural, "partitions of [{}] and [{}] have no join", self.n, other.n);
        }
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut c = x;
            while parent[c] != r {
                let next = parent[c];
                parent[c] = r;
                c = next;
            }
            r
        }
        fn union(parent: &mut [usize], a: usize, b: usize) -> bool {
            let (ra, rb) = (find(parent, a), find(parent, b));
            if ra == rb {
                return false;
            }
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
            true
        }
        for p in [self, other] {
            let mut first = [usize::MAX; MAX_ORDER];
            for i in 0..n {
                let b = p.block_of(i);
                if first[b] == usize::MAX {
                    first[b] = i;
                } else {
                    union(&mut parent, first[b], i);
                }
            }
        }
        loop {
            let labels: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
            let mut merged = false;
            'scan: for p1 in 0..n {
                for q1 in p1 + 1..n {
                    if labels[q1] == labels[p1] {
                        continue;
                    }
                    for p2 in q1 + 1..n {
                        if labels[p2] != labels[p1] {
                            continue;
                        }
                        for q2 in p2 + 1..n {
                            if labels[q2] == labels[q1] {
                                union(&mut parent, p1, q1);
                                merged = true;
                                break 'scan;
                            }
                        }
                    }
                }
            }
            if !merged {
                return Ok(NcPartition::from_raw_labels(&labels));
            }
        }
    }

    /// Restriction to the positions in `subset` (ascending), relabelled to `[|subset|]`.
    pub fn restrict(&self, subset: &[usize]) -> NcPartition {
        let raw: Vec<usize> = subset.iter().map(|&i| self.block_of(i)).collect();
        NcPartition::from_raw_labels(&raw)
    }
}

impl fmt::Display for NcPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (b, block) in self.blocks().iter().enumerate() {
            if b > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", e + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for NcPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NcPartition({})", self)
    }
}

/// Catalan number `(2n)! / (n! (n+1)!)`.
pub fn catalan(n: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..n as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// Label strings of NC(m) in canonical order, memoized by `m`.
fn label_strings(m: usize) -> Arc<Vec<Vec<u8>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<Vec<u8>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.read().unwrap().get(&m) {
        return hit.clone();
    }
    let built = Arc::new(build_label_strings(m));
    cache.write().unwrap().entry(m).or_insert(built).clone()
}

fn build_label_strings(m: usize) -> Vec<Vec<u8>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let firsts = first_blocks(m);
    let expand = |first: &Vec<usize>| -> Vec<Vec<u8>> {
        // Gaps after each element of the first block, in position order.
        let mut gaps = Vec::with_capacity(first.len());
        for (j, &start) in first.iter().enumerate() {
            let end = first.get(j + 1).copied().unwrap_or(m);
            gaps.push((start + 1, end));
        }
        let mut partial: Vec<(Vec<u8>, u8)> = {
            let mut base = vec![0u8; m];
            for &e in first {
                base[e] = 0;
            }
            vec![(base, 1)]
        };
        for &(lo, hi) in &gaps {
            if lo == hi {
                continue;
            }
            let subs = label_strings(hi - lo);
            let mut next = Vec::with_capacity(partial.len() * subs.len());
            for (labels, used) in &partial {
                for sub in subs.iter() {
                    let mut l = labels.clone();
                    let mut max_used = 0u8;
                    for (off, &s) in sub.iter().enumerate() {
                        l[lo + off] = used + s;
                        max_used = max_used.max(s + 1);
                    }
                    next.push((l, used + max_used));
                }
            }
            partial = next;
        }
        partial.into_iter().map(|(l, _)| l).collect()
    };
    if m >= 10 {
        firsts.par_iter().map(expand).collect::<Vec<_>>().concat()
    } else {
        firsts.iter().flat_map(expand).collect()
    }
}

/// Subsets of `{0..m}` containing 0, in lexicographic order of their sorted lists.
fn first_blocks(m: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        let last = *cur.last().unwrap();
        for next in last + 1..m {
            cur.push(next);
            rec(m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, &mut vec![0], &mut out);
    out
}

/// Every element of NC(n) exactly once, in canonical order.
pub fn enumerate_nc(n: usize) -> Result<Vec<NcPartition>> {
    enumerate_nc_with_cap(n, DEFAULT_ORDER_CAP)
}

pub fn enumerate_nc_with_cap(n: usize, cap: usize) -> Result<Vec<NcPartition>> {
    if n == 0 {
        bail!(Validation, "NC(n) requires n >= 1");
    }
    if n > cap.min(MAX_ORDER) {
        bail!(Capacity, "n = {} exceeds the order cap {}", n, cap.min(MAX_ORDER));
    }
    Ok(nc_cached(n).as_ref().clone())
}

/// Shared, cached NC(n) for internal consumers.
pub(crate) fn nc_cached(n: usize) -> Arc<Vec<NcPartition>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<NcPartition>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.read().unwrap().get(&n) {
        return hit.clone();
    }
    let parts: Vec<NcPartition> = label_strings(n)
        .iter()
        .map(|l| NcPartition { n: n as u8, labels: pack(l) })
        .collect();
    let parts = Arc::new(parts);
    cache.write().unwrap().entry(n).or_insert(parts).clone()
}

fn mobius_cache() -> &'static RwLock<HashMap<NcPartition, i64>> {
    static CACHE: OnceLock<RwLock<HashMap<NcPartition, i64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `μ(π, 1_m)` by ζ-inversion over the up-set of `π`.
fn mobius_to_top_of(pi: NcPartition) -> i64 {
    if let Some(&v) = mobius_cache().read().unwrap().get(&pi) {
        return v;
    }
    let m = pi.n();
    let value = if pi.labels == 0 {
        1
    } else {
        let all = nc_cached(m);
        let mut acc = 0i64;
        for rho in all.iter() {
            if *rho != pi && pi.leq_unchecked(rho) {
                acc += mobius_to_top_of(*rho);
            }
        }
        -acc
    };
    mobius_cache().write().unwrap().insert(pi, value);
    value
}

/// The Möbius function `μ(π, σ)` of NC(n). Fails unless `π ≤ σ`.
pub fn mobius(pi: &NcPartition, sigma: &NcPartition) -> Result<MobiusValue> {
    if !pi.leq(sigma)? {
        bail!(Domain, "mobius({}, {}) requires the first argument to refine the second", pi, sigma);
    }
    let mut value = 1i64;
    for block in sigma.blocks() {
        value *= mobius_to_top_of(pi.restrict(&block));
    }
    Ok(MobiusValue(value))
}

/// `μ(π, 1_n)` for every π in NC(n), aligned with [`enumerate_nc`].
pub(crate) fn mobius_to_top(n: usize) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.read().unwrap().get(&n) {
        return hit.clone();
    }
    let values: Vec<i64> = nc_cached(n).iter().map(|p| mobius_to_top_of(*p)).collect();
    let values = Arc::new(values);
    cache.write().unwrap().entry(n).or_insert(values).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, blocks: &[&[usize]]) -> NcPartition {
        let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.iter().map(|e| e - 1).collect()).collect();
        NcPartition::from_blocks(n, &blocks).unwrap()
    }

    #[test]
    fn crossing_detection() {
        assert!(!is_noncrossing(4, &[vec![0, 2], vec![1, 3]]).unwrap());
        assert!(is_noncrossing(3, &[vec![0], vec![1], vec![2]]).unwrap());
        assert!(is_noncrossing(4, &[vec![0, 3], vec![1, 2]]).unwrap());
    }

    #[test]
    fn malformed_partitions_rejected() {
        assert!(matches!(is_noncrossing(3, &[vec![0, 1], vec![1, 2]]), Err(crate::Error::Structural(_))));
        assert!(matches!(is_noncrossing(3, &[vec![0, 1]]), Err(crate::Error::Structural(_))));
        assert!(NcPartition::from_blocks(4, &[vec![0, 2], vec![1, 3]]).is_err());
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_nc(1).unwrap(), vec![NcPartition::top(1)]);
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert!(matches!(enumerate_nc(16), Err(crate::Error::Capacity(_))));
        assert!(enumerate_nc(0).is_err());
    }

    #[test]
    fn canonical_order_is_lexicographic_on_blocks() {
        for n in 1..=7 {
            let parts = enumerate_nc(n).unwrap();
            let ser: Vec<Vec<Vec<usize>>> = parts.iter().map(|p| p.blocks()).collect();
            for w in ser.windows(2) {
                assert!(w[0] < w[1], "{:?} !< {:?}", w[0], w[1]);
            }
        }
        let three: Vec<String> = enumerate_nc(3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(three, ["{{1},{2},{3}}", "{{1},{2,3}}", "{{1,2},{3}}", "{{1,2,3}}", "{{1,3},{2}}"]);
    }

    #[test]
    fn order_and_join_examples() {
        let s = p(3, &[&[1, 2], &[3]]);
        assert!(NcPartition::bottom(3).leq(&s).unwrap());
        assert!(s.leq(&s).unwrap());
        assert!(s.leq(&NcPartition::top(3)).unwrap());
        assert!(!NcPartition::top(3).leq(&s).unwrap());
        assert!(s.leq(&NcPartition::top(4)).is_err());

        let a = p(4, &[&[1, 3], &[2], &[4]]);
        let b = p(4, &[&[1], &[2, 4], &[3]]);
        assert_eq!(a.join(&b).unwrap(), NcPartition::top(4));
        assert_eq!(a.join(&NcPartition::bottom(4)).unwrap(), a);
        assert_eq!(a.join(&NcPartition::top(4)).unwrap(), NcPartition::top(4));
    }

    #[test]
    fn mobius_examples() {
        let two_bottom = NcPartition::bottom(2);
        assert_eq!(mobius(&two_bottom, &two_bottom).unwrap(), MobiusValue(1));
        assert_eq!(mobius(&two_bottom, &NcPartition::top(2)).unwrap(), MobiusValue(-1));
        assert_eq!(mobius(&NcPartition::bottom(4), &NcPartition::top(4)).unwrap(), MobiusValue(-5));
        let s = p(3, &[&[1, 2], &[3]]);
        assert!(matches!(mobius(&NcPartition::top(3), &s), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn restrict_relabels() {
        let q = p(5, &[&[1, 5], &[2, 3], &[4]]);
        assert_eq!(q.restrict(&[1, 2, 3]), p(3, &[&[1, 2], &[3]]));
    }
}

//! Enumeration of all `m`-subsets of cells in lexicographic combination order.
//!
//! Streams can be split by combination rank, so the same enumeration may be
//! consumed by several workers. [`Workers`] performs that split and reduces
//! partial results in rank order, which keeps every result independent of the
//! worker count.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space::{CellSet, SampleSpace};
use crate::support::SupportSet;

/// Default upper bound on the number of subsets a single enumeration may visit.
pub const DEFAULT_ENUMERATION_GUARD: u128 = 100_000_000;

const CHUNK: u128 = 1 << 13;

/// Exact `C(n, k)`, valid while the result fits in `u128` (always true for `n ≤ 64`).
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc = C(n, i) here, and C(n, i) * (n - i) is divisible by i + 1.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact `C(n, k)` for arbitrary sizes.
pub fn binomial_big(n: &BigUint, k: u64) -> BigUint {
    let big_k = BigUint::from(k);
    if &big_k > n {
        return BigUint::ZERO;
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// All `m`-subsets of a space's cells.
#[derive(Clone, Copy, Debug)]
pub struct Enumeration {
    space: SampleSpace,
    cardinality: u32,
    total: u128,
}

impl Enumeration {
    pub fn new(space: SampleSpace, cardinality: u32, guard: u128) -> Result<Self> {
        if cardinality < 1 || cardinality > space.total_cells() {
            return Err(Error::InvalidArgument(format!(
                "cardinality {cardinality} outside 1..={}",
                space.total_cells()
            )));
        }
        let total = binomial(space.total_cells(), cardinality);
        if total > guard {
            return Err(Error::EnumerationTooLarge {
                requested: total,
                guard,
            });
        }
        Ok(Enumeration {
            space,
            cardinality,
            total,
        })
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    pub fn cardinality(&self) -> u32 {
        self.cardinality
    }

    /// `C(q^N, m)`.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn iter(&self) -> Combinations {
        self.range(0, self.total)
    }

    /// Sets with combination rank in `start..end`.
    pub fn range(&self, start: u128, end: u128) -> Combinations {
        let end = end.min(self.total);
        let start = start.min(end);
        Combinations {
            space: self.space,
            indices: unrank(self.space.total_cells(), self.cardinality, start),
            remaining: end - start,
        }
    }

    /// The set at a given rank.
    pub fn nth(&self, rank: u128) -> Option<SupportSet> {
        (rank < self.total).then(|| {
            let idx = unrank(self.space.total_cells(), self.cardinality, rank);
            to_support(self.space, &idx)
        })
    }
}

/// Lexicographically ordered stream of `m`-subsets.
pub struct Combinations {
    space: SampleSpace,
    indices: Vec<u32>,
    remaining: u128,
}

impl Iterator for Combinations {
    type Item = SupportSet;

    fn next(&mut self) -> Option<SupportSet> {
        if self.remaining == 0 {
            return None;
        }
        let out = to_support(self.space, &self.indices);
        self.remaining -= 1;
        if self.remaining > 0 {
            advance(&mut self.indices, self.space.total_cells());
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, usize::try_from(self.remaining).ok())
    }
}

fn to_support(space: SampleSpace, indices: &[u32]) -> SupportSet {
    SupportSet::from_cells(space, CellSet::from_indices(indices.iter().copied()))
        .expect("combinations are nonempty")
}

fn advance(indices: &mut [u32], n: u32) {
    let m = indices.len();
    let mut j = m;
    while j > 0 {
        j -= 1;
        if indices[j] < n - (m - j) as u32 {
            indices[j] += 1;
            for k in j + 1..m {
                indices[k] = indices[k - 1] + 1;
            }
            return;
        }
    }
}

/// The `rank`-th `m`-combination of `0..n` in lexicographic order.
fn unrank(n: u32, m: u32, mut rank: u128) -> Vec<u32> {
    let mut out = Vec::with_capacity(m as usize);
    let mut next = 0u32;
    for slot in 0..m {
        loop {
            let with_next = binomial(n - next - 1, m - slot - 1);
            if rank < with_next {
                out.push(next);
                next += 1;
                break;
            }
            rank -= with_next;
            next += 1;
        }
    }
    out
}

/// Worker pool for rank-partitioned enumeration.
pub struct Workers {
    pool: Option<rayon::ThreadPool>,
}

impl Workers {
    /// `jobs <= 1` runs everything on the calling thread.
    pub fn new(jobs: usize) -> Self {
        let pool = (jobs > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .expect("thread pool")
        });
        Workers { pool }
    }

    pub fn sequential() -> Self {
        Workers { pool: None }
    }

    pub fn jobs(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Folds each rank chunk with `fold`, then combines chunk results in rank order.
    pub fn map_reduce<T, I, F, R>(&self, en: &Enumeration, init: I, fold: F, reduce: R) -> T
    where
        T: Send,
        I: Fn() -> T + Sync,
        F: Fn(T, u128, SupportSet) -> T + Sync,
        R: Fn(T, T) -> T,
    {
        let chunks = en.total().div_ceil(CHUNK);
        let run = |c: u128| {
            let start = c * CHUNK;
            en.range(start, start + CHUNK)
                .zip(start..)
                .fold(init(), |acc, (s, rank)| fold(acc, rank, s))
        };
        match &self.pool {
            None => (0..chunks).map(run).fold(init(), &reduce),
            Some(pool) => {
                let parts: Vec<T> = pool.install(|| {
                    (0..chunks as u64)
                        .into_par_iter()
                        .map(|c| run(c as u128))
                        .collect()
                });
                parts.into_iter().fold(init(), reduce)
            }
        }
    }

    /// Lowest-rank set satisfying `pred`.
    pub fn find_first<P>(&self, en: &Enumeration, pred: P) -> Option<SupportSet>
    where
        P: Fn(&SupportSet) -> bool + Sync,
    {
        match &self.pool {
            None => en.iter().find(|s| pred(s)),
            Some(pool) => {
                let chunks = en.total().div_ceil(CHUNK);
                pool.install(|| {
                    (0..chunks as u64).into_par_iter().find_map_first(|c| {
                        let start = c as u128 * CHUNK;
                        en.range(start, start + CHUNK).find(|s| pred(s))
                    })
                })
            }
        }
    }

    /// True when some set satisfies `pred`; visits sets in rank order and
    /// stops early.
    pub fn any<P>(&self, en: &Enumeration, pred: P) -> bool
    where
        P: Fn(&SupportSet) -> bool + Sync,
    {
        match &self.pool {
            None => en.iter().any(|s| pred(&s)),
            Some(pool) => {
                let chunks = en.total().div_ceil(CHUNK);
                pool.install(|| {
                    (0..chunks as u64).into_par_iter().any(|c| {
                        let start = c as u128 * CHUNK;
                        en.range(start, start + CHUNK).any(|s| pred(&s))
                    })
                })
            }
        }
    }

    /// Number of sets satisfying `pred`.
    pub fn count<P>(&self, en: &Enumeration, pred: P) -> u128
    where
        P: Fn(&SupportSet) -> bool + Sync,
    {
        self.map_reduce(
            en,
            || 0u128,
            |acc, _, s| acc + u128::from(pred(&s)),
            |a, b| a + b,
        )
    }
}

impl Default for Workers {
    fn default() -> Self {
        Self::sequential()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support::CellView;
    use std::collections::HashSet;

    fn space(q: u32, n: u32) -> SampleSpace {
        SampleSpace::new(q, n).unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(binomial(25, 3), 2300);
        assert_eq!(binomial(25, 9), 2_042_975);
        assert_eq!(binomial(9, 5), 126);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(
            binomial_big(&BigUint::from(25u32), 9),
            BigUint::from(2_042_975u32)
        );
        assert_eq!(binomial_big(&BigUint::from(3u32), 4), BigUint::ZERO);
    }

    #[test]
    fn enumerate_examples() {
        let en = Enumeration::new(space(2, 2), 3, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert_eq!(en.iter().count(), 4);
        let en = Enumeration::new(space(5, 2), 3, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert_eq!(en.iter().count(), 2300);
        let en = Enumeration::new(space(5, 2), 9, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert_eq!(en.total(), 2_042_975);
    }

    #[test]
    fn guard_and_bounds() {
        assert_eq!(
            Enumeration::new(space(5, 2), 9, 1000).unwrap_err(),
            Error::EnumerationTooLarge {
                requested: 2_042_975,
                guard: 1000
            }
        );
        assert!(Enumeration::new(space(2, 2), 0, DEFAULT_ENUMERATION_GUARD).is_err());
        assert!(Enumeration::new(space(2, 2), 5, DEFAULT_ENUMERATION_GUARD).is_err());
    }

    #[test]
    fn exact_counts_small_spaces() {
        for m in 1..=4 {
            let en = Enumeration::new(space(2, 2), m, DEFAULT_ENUMERATION_GUARD).unwrap();
            let sets: HashSet<_> = en.iter().collect();
            assert_eq!(sets.len() as u128, binomial(4, m));
            assert!(sets.iter().all(|s| s.len() == m as usize));
        }
        for m in 1..=3 {
            let en = Enumeration::new(space(3, 2), m, DEFAULT_ENUMERATION_GUARD).unwrap();
            let sets: HashSet<_> = en.iter().collect();
            assert_eq!(sets.len() as u128, binomial(9, m));
        }
    }

    #[test]
    fn lexicographic_order() {
        let en = Enumeration::new(space(2, 2), 3, DEFAULT_ENUMERATION_GUARD).unwrap();
        let got: Vec<Vec<u32>> = en.iter().map(|s| s.cells().iter().collect()).collect();
        assert_eq!(
            got,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
    }

    #[test]
    fn unrank_matches_stream() {
        let en = Enumeration::new(space(3, 2), 4, DEFAULT_ENUMERATION_GUARD).unwrap();
        for (rank, s) in en.iter().enumerate() {
            assert_eq!(en.nth(rank as u128), Some(s));
        }
        assert_eq!(en.nth(en.total()), None);
        let tail: Vec<_> = en.range(100, 1000).collect();
        assert_eq!(tail.len(), 26);
        assert_eq!(tail[0], en.nth(100).unwrap());
    }

    #[test]
    fn partitioned_results_independent_of_workers() {
        let en = Enumeration::new(space(4, 2), 7, DEFAULT_ENUMERATION_GUARD).unwrap();
        let pred = |s: &SupportSet| s.project(0).unwrap().len() == 4;
        let seq = Workers::sequential().count(&en, pred);
        let par = Workers::new(4).count(&en, pred);
        assert_eq!(seq, par);
        let first_seq = Workers::sequential().find_first(&en, |s| s.cells().contains(15));
        let first_par = Workers::new(3).find_first(&en, |s| s.cells().contains(15));
        assert_eq!(first_seq, first_par);
        assert!(Workers::new(2).any(&en, |s| s.cells().contains(15)));
    }
}

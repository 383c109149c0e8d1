//! Sample spaces, points and cell bitmasks.
//!
//! A sample space over `N` informants with a common alphabet `0..q` has
//! `q^N` cells. Cells are indexed lexicographically with coordinate 0 as the
//! most significant digit, so `index(p) = Σ p_i · q^(N-1-i)`. Every subset of
//! cells is stored as a [`CellSet`] bitmask, which bounds the space at
//! [`MAX_CELLS`] cells.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `q^N`.
pub const DEFAULT_CELL_CAP: u32 = 32;

/// Hard limit imposed by the 64-bit cell mask.
pub const MAX_CELLS: u32 = 64;

/// The universe `(q, N)` of `q^N` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleSpace {
    alphabet_size: u32,
    num_informants: u32,
    total_cells: u32,
}

impl SampleSpace {
    /// Builds a space under [`DEFAULT_CELL_CAP`].
    pub fn new(alphabet_size: u32, num_informants: u32) -> Result<Self> {
        Self::with_cap(alphabet_size, num_informants, DEFAULT_CELL_CAP)
    }

    /// Builds a space under an explicit cell cap (at most [`MAX_CELLS`]).
    pub fn with_cap(alphabet_size: u32, num_informants: u32, cap: u32) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::InvalidSpace(format!(
                "alphabet size must be at least 2, got {alphabet_size}"
            )));
        }
        if num_informants < 1 {
            return Err(Error::InvalidSpace(
                "need at least one informant".to_string(),
            ));
        }
        if cap > MAX_CELLS {
            return Err(Error::InvalidSpace(format!(
                "cell cap {cap} exceeds the hard limit {MAX_CELLS}"
            )));
        }
        let cells = (alphabet_size as u128)
            .checked_pow(num_informants)
            .unwrap_or(u128::MAX);
        if cells > cap as u128 {
            return Err(Error::CellCapExceeded { cells, cap });
        }
        Ok(SampleSpace {
            alphabet_size,
            num_informants,
            total_cells: cells as u32,
        })
    }

    /// Parses a `"QxN"` space descriptor such as `"5x2"`.
    pub fn parse_spec(text: &str, cap: u32) -> Result<Self> {
        let (q, n) = parse_dims(text)?;
        Self::with_cap(q, n, cap)
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn num_informants(&self) -> u32 {
        self.num_informants
    }

    pub fn total_cells(&self) -> u32 {
        self.total_cells
    }

    /// Number of informants as a `usize`, for indexing.
    pub fn n(&self) -> usize {
        self.num_informants as usize
    }

    /// Mask with every cell set.
    pub fn full(&self) -> CellSet {
        CellSet::full(self.total_cells)
    }

    /// Bits needed to send one raw symbol, `⌈log2 q⌉`.
    pub fn symbol_bits(&self) -> u32 {
        crate::measures::ceil_log2(self.alphabet_size as u64)
    }

    /// `N · ⌈log2 q⌉`, the cost of every informant sending a full symbol.
    pub fn max_rate_bits(&self) -> u32 {
        self.num_informants * self.symbol_bits()
    }

    pub fn point_index(&self, point: &Point) -> Result<u32> {
        self.check_point(point)?;
        Ok(point
            .coords()
            .iter()
            .fold(0u32, |acc, &c| acc * self.alphabet_size + c))
    }

    /// Inverse of [`SampleSpace::point_index`].
    pub fn index_point(&self, index: u32) -> Point {
        debug_assert!(index < self.total_cells);
        let mut coords = vec![0u32; self.n()];
        let mut rest = index;
        for slot in coords.iter_mut().rev() {
            *slot = rest % self.alphabet_size;
            rest /= self.alphabet_size;
        }
        Point::new(coords)
    }

    /// Coordinate `i` of the cell with the given index.
    pub fn coord_of(&self, index: u32, informant: usize) -> u32 {
        let shift = self.num_informants as usize - 1 - informant;
        (index / self.alphabet_size.pow(shift as u32)) % self.alphabet_size
    }

    pub fn check_point(&self, point: &Point) -> Result<()> {
        if point.len() != self.n() {
            return Err(Error::InvalidPoint {
                point: point.coords().to_vec(),
                reason: format!("expected {} coordinates", self.num_informants),
            });
        }
        if let Some(&bad) = point.coords().iter().find(|&&c| c >= self.alphabet_size) {
            return Err(Error::InvalidPoint {
                point: point.coords().to_vec(),
                reason: format!("symbol {bad} not below alphabet size {}", self.alphabet_size),
            });
        }
        Ok(())
    }

    pub fn check_informant(&self, informant: usize) -> Result<()> {
        if informant >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: informant,
                num_informants: self.n(),
            });
        }
        Ok(())
    }

    pub fn check_symbol(&self, symbol: u32) -> Result<()> {
        if symbol >= self.alphabet_size {
            return Err(Error::InvalidSymbol {
                symbol,
                alphabet_size: self.alphabet_size,
            });
        }
        Ok(())
    }

    /// Precomputes the per-coordinate slice masks.
    pub fn slices(&self) -> Slices {
        Slices::new(*self)
    }
}

impl fmt::Display for SampleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.alphabet_size, self.num_informants)
    }
}

/// Splits `"QxN"` into its two integers.
pub(crate) fn parse_dims(text: &str) -> Result<(u32, u32)> {
    let trimmed = text.trim();
    let (q, n) = trimmed
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Parse(format!("expected \"QxN\", got {trimmed:?}")))?;
    let q = q
        .trim()
        .parse::<u32>()
        .map_err(|e| Error::Parse(format!("bad alphabet size {q:?}: {e}")))?;
    let n = n
        .trim()
        .parse::<u32>()
        .map_err(|e| Error::Parse(format!("bad informant count {n:?}: {e}")))?;
    Ok((q, n))
}

/// One data vector `(x_1, …, x_N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<u32>);

impl Point {
    pub fn new(coords: Vec<u32>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u32>> for Point {
    fn from(coords: Vec<u32>) -> Self {
        Point(coords)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A subset of cells as a bitmask; bit `k` is the cell with index `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellSet(pub u64);

impl CellSet {
    pub const EMPTY: CellSet = CellSet(0);

    pub fn full(cells: u32) -> Self {
        if cells >= 64 {
            CellSet(u64::MAX)
        } else {
            CellSet((1u64 << cells) - 1)
        }
    }

    pub fn singleton(index: u32) -> Self {
        CellSet(1u64 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        CellSet(indices.into_iter().fold(0u64, |m, k| m | (1u64 << k)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: u32) -> bool {
        index < 64 && self.0 & (1u64 << index) != 0
    }

    pub fn insert(&mut self, index: u32) {
        self.0 |= 1u64 << index;
    }

    pub fn is_subset(self, other: CellSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: CellSet) -> CellSet {
        CellSet(self.0 & other.0)
    }

    pub fn union(self, other: CellSet) -> CellSet {
        CellSet(self.0 | other.0)
    }

    pub fn minus(self, other: CellSet) -> CellSet {
        CellSet(self.0 & !other.0)
    }

    /// Lowest set index.
    pub fn first(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros())
    }

    /// Set indices in ascending order.
    pub fn iter(self) -> CellIter {
        CellIter(self.0)
    }
}

impl IntoIterator for CellSet {
    type Item = u32;
    type IntoIter = CellIter;

    fn into_iter(self) -> CellIter {
        self.iter()
    }
}

pub struct CellIter(u64);

impl Iterator for CellIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let k = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(k)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for CellIter {}

/// Precomputed masks `slice(i, v) = { cells with x_i = v }`.
#[derive(Clone, Debug)]
pub struct Slices {
    space: SampleSpace,
    masks: Vec<CellSet>,
}

impl Slices {
    pub fn new(space: SampleSpace) -> Self {
        let q = space.alphabet_size() as usize;
        let n = space.n();
        let mut masks = vec![CellSet::EMPTY; q * n];
        for cell in 0..space.total_cells() {
            for i in 0..n {
                let v = space.coord_of(cell, i) as usize;
                masks[i * q + v].insert(cell);
            }
        }
        Slices { space, masks }
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    #[inline]
    pub fn slice(&self, informant: usize, value: u32) -> CellSet {
        self.masks[informant * self.space.alphabet_size() as usize + value as usize]
    }

    /// Values of coordinate `informant` present in `cells`, as a bitmask over symbols.
    #[inline]
    pub fn projection_mask(&self, cells: CellSet, informant: usize) -> u64 {
        let q = self.space.alphabet_size();
        let mut out = 0u64;
        for v in 0..q {
            if !cells.intersect(self.slice(informant, v)).is_empty() {
                out |= 1u64 << v;
            }
        }
        out
    }

    /// Number of distinct values of coordinate `informant` in `cells`.
    #[inline]
    pub fn projection_size(&self, cells: CellSet, informant: usize) -> u32 {
        self.projection_mask(cells, informant).count_ones()
    }
}

//! Support sets, conditioning, and the JSON / grid text formats.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{parse_dims, CellSet, Point, SampleSpace, Slices};

/// Text encodings accepted by [`SupportSet::parse`] and [`SupportSet::serialize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    /// `N = 2` only: a `"QxN"` header line, then `q` rows of `q` characters.
    Grid,
}

/// Set of possibly-occurring data vectors. Never empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SupportSet {
    space: SampleSpace,
    cells: CellSet,
}

/// Oracle recursion state: a subset of a support set, possibly empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConsistentSet {
    space: SampleSpace,
    cells: CellSet,
}

/// Common read access for [`SupportSet`] and [`ConsistentSet`].
pub trait CellView {
    fn space(&self) -> SampleSpace;
    fn cells(&self) -> CellSet;

    fn len(&self) -> usize {
        self.cells().len() as usize
    }

    fn is_empty(&self) -> bool {
        self.cells().is_empty()
    }

    fn contains(&self, point: &Point) -> bool {
        self.space()
            .point_index(point)
            .map(|k| self.cells().contains(k))
            .unwrap_or(false)
    }

    /// Points in ascending index order.
    fn points(&self) -> Vec<Point> {
        let space = self.space();
        self.cells().iter().map(|k| space.index_point(k)).collect()
    }

    /// `S_{X_i}`: the symbols informant `i` takes over the set.
    fn project(&self, informant: usize) -> Result<BTreeSet<u32>> {
        let space = self.space();
        space.check_informant(informant)?;
        Ok(self
            .cells()
            .iter()
            .map(|k| space.coord_of(k, informant))
            .collect())
    }

    /// Points whose coordinate `informant` equals `value`.
    fn condition(&self, informant: usize, value: u32) -> Result<ConsistentSet> {
        let space = self.space();
        space.check_informant(informant)?;
        space.check_symbol(value)?;
        let cells = CellSet::from_indices(
            self.cells()
                .iter()
                .filter(|&k| space.coord_of(k, informant) == value),
        );
        Ok(ConsistentSet { space, cells })
    }
}

impl CellView for SupportSet {
    fn space(&self) -> SampleSpace {
        self.space
    }

    fn cells(&self) -> CellSet {
        self.cells
    }
}

impl CellView for ConsistentSet {
    fn space(&self) -> SampleSpace {
        self.space
    }

    fn cells(&self) -> CellSet {
        self.cells
    }
}

impl ConsistentSet {
    pub fn new(space: SampleSpace, cells: CellSet) -> Self {
        debug_assert!(cells.is_subset(space.full()));
        ConsistentSet { space, cells }
    }

    /// Promotes to a support set; fails when empty.
    pub fn into_support(self) -> Result<SupportSet> {
        SupportSet::from_cells(self.space, self.cells)
    }
}

impl From<SupportSet> for ConsistentSet {
    fn from(s: SupportSet) -> Self {
        ConsistentSet {
            space: s.space,
            cells: s.cells,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportFile {
    alphabet_size: u32,
    num_informants: u32,
    points: Vec<Vec<u32>>,
}

impl SupportSet {
    pub fn from_cells(space: SampleSpace, cells: CellSet) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptySupport);
        }
        if !cells.is_subset(space.full()) {
            return Err(Error::InvalidArgument(format!(
                "cell mask {:#x} exceeds {} cells",
                cells.bits(),
                space.total_cells()
            )));
        }
        Ok(SupportSet { space, cells })
    }

    /// Validates points and rejects duplicates and the empty set.
    pub fn from_points<I>(space: SampleSpace, points: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<Point>,
    {
        let mut cells = CellSet::EMPTY;
        for p in points {
            let p = p.into();
            let k = space.point_index(&p)?;
            if cells.contains(k) {
                return Err(Error::DuplicatePoint(p.coords().to_vec()));
            }
            cells.insert(k);
        }
        Self::from_cells(space, cells)
    }

    pub fn full(space: SampleSpace) -> Self {
        SupportSet {
            space,
            cells: space.full(),
        }
    }

    /// True when the set is the whole grid.
    pub fn is_full(&self) -> bool {
        self.cells == self.space.full()
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.space == other.space && self.cells.is_subset(other.cells)
    }

    pub fn parse(text: &[u8], format: Format, cell_cap: u32) -> Result<Self> {
        let text = std::str::from_utf8(text).map_err(|e| Error::Parse(e.to_string()))?;
        match format {
            Format::Json => Self::parse_json(text, cell_cap),
            Format::Grid => Self::parse_grid(text, cell_cap),
        }
    }

    fn parse_json(text: &str, cell_cap: u32) -> Result<Self> {
        let file: SupportFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let space = SampleSpace::with_cap(file.alphabet_size, file.num_informants, cell_cap)?;
        Self::from_points(space, file.points)
    }

    fn parse_grid(text: &str, cell_cap: u32) -> Result<Self> {
        let mut lines = text.lines().map(str::trim_end).filter(|l| !l.is_empty());
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid".to_string()))?;
        let (q, rows): (u32, Vec<&str>) = if first.contains(['x', 'X']) && first
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit())
        {
            let (q, n) = parse_dims(first)?;
            if n != 2 {
                return Err(Error::UnsupportedFormat(n as usize));
            }
            (q, lines.collect())
        } else {
            // Headerless grids are square.
            let rows: Vec<&str> = std::iter::once(first).chain(lines).collect();
            (rows.len() as u32, rows)
        };
        let space = SampleSpace::with_cap(q, 2, cell_cap)?;
        if rows.len() != q as usize {
            return Err(Error::Parse(format!(
                "expected {q} grid rows, got {}",
                rows.len()
            )));
        }
        let mut points = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != q as usize {
                return Err(Error::Parse(format!(
                    "grid row {r} has {} characters, expected {q}",
                    chars.len()
                )));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                match ch {
                    'x' | 'X' => points.push(Point::new(vec![r as u32, c as u32])),
                    '.' => {}
                    other => {
                        return Err(Error::Parse(format!(
                            "unexpected character {other:?} in grid row {r}"
                        )))
                    }
                }
            }
        }
        Self::from_points(space, points)
    }

    /// Deterministic encoding: points ascend by cell index.
    pub fn serialize(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let file = SupportFile {
                    alphabet_size: self.space.alphabet_size(),
                    num_informants: self.space.num_informants(),
                    points: self.points().into_iter().map(|p| p.coords().to_vec()).collect(),
                };
                Ok(serde_json::to_string(&file).expect("support file serializes"))
            }
            Format::Grid => {
                if self.space.num_informants() != 2 {
                    return Err(Error::UnsupportedFormat(self.space.n()));
                }
                Ok(format!("{}\n{}\n", self.space, self.grid_body()))
            }
        }
    }

    /// Grid rows without the header, joined by newlines.
    fn grid_body(&self) -> String {
        let q = self.space.alphabet_size();
        (0..q)
            .map(|r| {
                (0..q)
                    .map(|c| {
                        if self.cells.contains(r * q + c) {
                            'x'
                        } else {
                            '.'
                        }
                    })
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Same as [`CellView::condition`] but returns the slice via precomputed masks.
    pub fn condition_fast(&self, slices: &Slices, informant: usize, value: u32) -> ConsistentSet {
        ConsistentSet {
            space: self.space,
            cells: self.cells.intersect(slices.slice(informant, value)),
        }
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.points().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::DEFAULT_CELL_CAP;

    fn set(q: u32, n: u32, pts: &[&[u32]]) -> SupportSet {
        let space = SampleSpace::new(q, n).unwrap();
        SupportSet::from_points(space, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    const DIAG_JSON: &str = r#"{"alphabet_size":2,"num_informants":2,"points":[[0,0],[1,1]]}"#;

    #[test]
    fn parse_json_diagonal() {
        let s = SupportSet::parse(DIAG_JSON.as_bytes(), Format::Json, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(s, set(2, 2, &[&[0, 0], &[1, 1]]));
    }

    #[test]
    fn parse_grid_matches_json() {
        let s = SupportSet::parse(b"2x2\nx.\n.x", Format::Grid, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(s, set(2, 2, &[&[0, 0], &[1, 1]]));
        let headerless = SupportSet::parse(b"x.\n.x\n", Format::Grid, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(headerless, s);
    }

    #[test]
    fn parse_errors() {
        let dup = r#"{"alphabet_size":2,"num_informants":2,"points":[[0,0],[0,0]]}"#;
        assert_eq!(
            SupportSet::parse(dup.as_bytes(), Format::Json, DEFAULT_CELL_CAP),
            Err(Error::DuplicatePoint(vec![0, 0]))
        );
        let empty = r#"{"alphabet_size":2,"num_informants":2,"points":[]}"#;
        assert_eq!(
            SupportSet::parse(empty.as_bytes(), Format::Json, DEFAULT_CELL_CAP),
            Err(Error::EmptySupport)
        );
        let bad_space = r#"{"alphabet_size":1,"num_informants":2,"points":[[0,0]]}"#;
        assert!(matches!(
            SupportSet::parse(bad_space.as_bytes(), Format::Json, DEFAULT_CELL_CAP),
            Err(Error::InvalidSpace(_))
        ));
        let bad_symbol = r#"{"alphabet_size":2,"num_informants":2,"points":[[0,2]]}"#;
        assert!(matches!(
            SupportSet::parse(bad_symbol.as_bytes(), Format::Json, DEFAULT_CELL_CAP),
            Err(Error::InvalidPoint { .. })
        ));
        assert!(matches!(
            SupportSet::parse(b"{\"alphabet_size\":2", Format::Json, DEFAULT_CELL_CAP),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            SupportSet::parse(b"2x2\nx.\n.", Format::Grid, DEFAULT_CELL_CAP),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            SupportSet::parse(b"2x2\nx?\n..", Format::Grid, DEFAULT_CELL_CAP),
            Err(Error::Parse(_))
        ));
        assert_eq!(
            SupportSet::parse(b"2x2\n..\n..", Format::Grid, DEFAULT_CELL_CAP),
            Err(Error::EmptySupport)
        );
    }

    #[test]
    fn serialize_examples() {
        let diag = set(2, 2, &[&[1, 1], &[0, 0]]);
        assert_eq!(diag.serialize(Format::Json).unwrap(), DIAG_JSON);
        assert_eq!(diag.serialize(Format::Grid).unwrap(), "2x2\nx.\n.x\n");
        let cube = set(2, 3, &[&[0, 0, 1]]);
        assert_eq!(cube.serialize(Format::Grid), Err(Error::UnsupportedFormat(3)));
    }

    #[test]
    fn project_examples() {
        let l = set(2, 2, &[&[0, 0], &[0, 1], &[1, 0]]);
        assert_eq!(l.project(0).unwrap(), BTreeSet::from([0, 1]));
        let row = set(2, 2, &[&[0, 0], &[0, 1]]);
        assert_eq!(row.project(0).unwrap(), BTreeSet::from([0]));
        let full = SupportSet::full(SampleSpace::new(5, 2).unwrap());
        assert_eq!(full.project(1).unwrap(), (0..5).collect());
        assert_eq!(
            l.project(2),
            Err(Error::IndexOutOfRange {
                index: 2,
                num_informants: 2
            })
        );
    }

    #[test]
    fn condition_examples() {
        let l = set(2, 2, &[&[0, 0], &[0, 1], &[1, 0]]);
        assert_eq!(
            l.condition(0, 0).unwrap().points(),
            vec![Point::new(vec![0, 0]), Point::new(vec![0, 1])]
        );
        assert_eq!(l.condition(0, 1).unwrap().points(), vec![Point::new(vec![1, 0])]);
        assert_eq!(l.condition(1, 1).unwrap().points(), vec![Point::new(vec![0, 1])]);
        let empty = l.condition(0, 1).unwrap().condition(1, 1).unwrap();
        assert!(empty.is_empty());
        assert!(empty.project(0).unwrap().is_empty());
        assert_eq!(empty.into_support(), Err(Error::EmptySupport));
        assert!(matches!(l.condition(0, 2), Err(Error::InvalidSymbol { .. })));
        assert!(matches!(l.condition(3, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn condition_fast_agrees() {
        let l = set(3, 2, &[&[0, 0], &[0, 1], &[1, 0], &[2, 2]]);
        let slices = l.space().slices();
        for i in 0..2 {
            for v in 0..3 {
                assert_eq!(l.condition_fast(&slices, i, v), l.condition(i, v).unwrap());
            }
        }
    }
}

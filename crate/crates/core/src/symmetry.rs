//! Cost-preserving relabelings: coordinate permutations composed with
//! independent per-coordinate value bijections.

use crate::error::{Error, Result};
use crate::space::{CellSet, SampleSpace};
use crate::support::{CellView, SupportSet};

/// One group element. The image of `p` is `p'` with
/// `p'[j] = value_maps[j][p[coord_perm[j]]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symmetry {
    pub coord_perm: Vec<usize>,
    pub value_maps: Vec<Vec<u32>>,
}

impl Symmetry {
    pub fn identity(space: SampleSpace) -> Self {
        Symmetry {
            coord_perm: (0..space.n()).collect(),
            value_maps: vec![(0..space.alphabet_size()).collect(); space.n()],
        }
    }

    /// Pure coordinate permutation.
    pub fn permute(space: SampleSpace, coord_perm: Vec<usize>) -> Self {
        Symmetry {
            coord_perm,
            value_maps: vec![(0..space.alphabet_size()).collect(); space.n()],
        }
    }

    pub fn validate(&self, space: SampleSpace) -> Result<()> {
        let n = space.n();
        if self.coord_perm.len() != n || !is_permutation(&self.coord_perm, n) {
            return Err(Error::InvalidPermutation(format!(
                "coordinate permutation {:?} is not a permutation of 0..{n}",
                self.coord_perm
            )));
        }
        if self.value_maps.len() != n {
            return Err(Error::InvalidPermutation(format!(
                "expected {n} value maps, got {}",
                self.value_maps.len()
            )));
        }
        let q = space.alphabet_size() as usize;
        for (j, map) in self.value_maps.iter().enumerate() {
            let as_usize: Vec<usize> = map.iter().map(|&v| v as usize).collect();
            if map.len() != q || !is_permutation(&as_usize, q) {
                return Err(Error::InvalidPermutation(format!(
                    "value map {j} {map:?} is not a bijection of 0..{q}"
                )));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Symmetry {
        let n = self.coord_perm.len();
        let mut coord_perm = vec![0; n];
        let mut value_maps = vec![Vec::new(); n];
        for (j, &src) in self.coord_perm.iter().enumerate() {
            coord_perm[src] = j;
            let map = &self.value_maps[j];
            let mut inv = vec![0u32; map.len()];
            for (v, &w) in map.iter().enumerate() {
                inv[w as usize] = v as u32;
            }
            value_maps[src] = inv;
        }
        Symmetry {
            coord_perm,
            value_maps,
        }
    }
}

fn is_permutation(items: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    items.iter().all(|&k| k < n && !std::mem::replace(&mut seen[k], true)) && items.len() == n
}

/// Image of `s` under `sym`.
pub fn apply_symmetry(s: &SupportSet, sym: &Symmetry) -> Result<SupportSet> {
    let space = s.space();
    sym.validate(space)?;
    let q = space.alphabet_size();
    let cells = CellSet::from_indices(s.points().iter().map(|p| {
        sym.coord_perm
            .iter()
            .zip(&sym.value_maps)
            .fold(0u32, |acc, (&src, map)| acc * q + map[p.coords()[src] as usize])
    }));
    SupportSet::from_cells(space, cells)
}

/// Total order on equal-size cell sets: compares ascending index lists lexicographically.
fn lex_less(a: CellSet, b: CellSet) -> bool {
    let diff = a.bits() ^ b.bits();
    diff != 0 && a.bits() & diff & diff.wrapping_neg() != 0
}

/// Least orbit element under coordinate permutations and per-coordinate
/// value bijections, where sets are ordered by their ascending index lists.
///
/// Exhaustive over the `N!·(q!)^N` group elements.
pub fn canonical_form(s: &SupportSet) -> SupportSet {
    let space = s.space();
    let n = space.n();
    let q = space.alphabet_size();
    if n == 1 {
        // Every m-subset of a single coordinate is in one orbit.
        let cells = CellSet::from_indices(0..s.len() as u32);
        return SupportSet::from_cells(space, cells).expect("nonempty");
    }
    let points: Vec<Vec<u32>> = s.points().into_iter().map(|p| p.coords().to_vec()).collect();
    let coord_perms = permutations(n);
    let value_perms: Vec<Vec<u32>> = permutations(q as usize)
        .into_iter()
        .map(|p| p.into_iter().map(|v| v as u32).collect())
        .collect();
    let mut best = s.cells();
    let mut choice = vec![0usize; n];
    for perm in &coord_perms {
        choice.iter_mut().for_each(|c| *c = 0);
        loop {
            let image = CellSet::from_indices(points.iter().map(|p| {
                perm.iter()
                    .zip(&choice)
                    .fold(0u32, |acc, (&src, &m)| acc * q + value_perms[m][p[src] as usize])
            }));
            if lex_less(image, best) {
                best = image;
            }
            // Odometer over value-map choices.
            let mut j = 0;
            while j < n {
                choice[j] += 1;
                if choice[j] < value_perms.len() {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }
    }
    SupportSet::from_cells(space, best).expect("image of a nonempty set")
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(q: u32, n: u32, pts: &[&[u32]]) -> SupportSet {
        let space = SampleSpace::new(q, n).unwrap();
        SupportSet::from_points(space, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    #[test]
    fn swap_and_relabel_examples() {
        let space = SampleSpace::new(2, 2).unwrap();
        let swap = Symmetry::permute(space, vec![1, 0]);
        let diag = set(2, 2, &[&[0, 0], &[1, 1]]);
        assert_eq!(apply_symmetry(&diag, &swap).unwrap(), diag);
        let row = set(2, 2, &[&[0, 0], &[0, 1]]);
        assert_eq!(
            apply_symmetry(&row, &swap).unwrap(),
            set(2, 2, &[&[0, 0], &[1, 0]])
        );
        let flip = Symmetry {
            coord_perm: vec![0, 1],
            value_maps: vec![vec![1, 0], vec![1, 0]],
        };
        assert_eq!(
            apply_symmetry(&set(2, 2, &[&[0, 0]]), &flip).unwrap(),
            set(2, 2, &[&[1, 1]])
        );
    }

    #[test]
    fn rejects_invalid_symmetries() {
        let s = set(3, 2, &[&[0, 0]]);
        let bad_perm = Symmetry {
            coord_perm: vec![0, 0],
            value_maps: vec![vec![0, 1, 2]; 2],
        };
        assert!(matches!(
            apply_symmetry(&s, &bad_perm),
            Err(Error::InvalidPermutation(_))
        ));
        let bad_map = Symmetry {
            coord_perm: vec![1, 0],
            value_maps: vec![vec![0, 1, 1], vec![0, 1, 2]],
        };
        assert!(matches!(
            apply_symmetry(&s, &bad_map),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn inverse_recovers() {
        let s = set(3, 3, &[&[0, 1, 2], &[2, 2, 0], &[1, 0, 0]]);
        let sym = Symmetry {
            coord_perm: vec![2, 0, 1],
            value_maps: vec![vec![1, 2, 0], vec![2, 1, 0], vec![0, 2, 1]],
        };
        let image = apply_symmetry(&s, &sym).unwrap();
        assert_eq!(apply_symmetry(&image, &sym.inverse()).unwrap(), s);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_form(&set(2, 2, &[&[1, 1]])), set(2, 2, &[&[0, 0]]));
        assert_eq!(
            canonical_form(&set(2, 2, &[&[0, 0], &[1, 0]])),
            set(2, 2, &[&[0, 0], &[0, 1]])
        );
        let full = SupportSet::full(SampleSpace::new(3, 2).unwrap());
        assert_eq!(canonical_form(&full), full);
        assert_eq!(
            canonical_form(&set(5, 1, &[&[4], &[2]])),
            set(5, 1, &[&[0], &[1]])
        );
    }

    #[test]
    fn canonical_is_brute_force_orbit_minimum() {
        // Orbit of {(0,0),(1,0)} in 2x2 enumerated by hand: the four
        // "vertical pairs" and "horizontal pairs". Least is {(0,0),(0,1)}.
        let s = set(2, 2, &[&[0, 0], &[1, 0]]);
        let space = s.space();
        let mut images = Vec::new();
        for perm in [vec![0, 1], vec![1, 0]] {
            for a in [vec![0, 1], vec![1, 0]] {
                for b in [vec![0, 1], vec![1, 0]] {
                    let sym = Symmetry {
                        coord_perm: perm.clone(),
                        value_maps: vec![a.clone(), b.clone()],
                    };
                    let img = apply_symmetry(&s, &sym).unwrap();
                    images.push(img.cells().iter().collect::<Vec<_>>());
                }
            }
        }
        let least = images.into_iter().min().unwrap();
        assert_eq!(
            canonical_form(&s),
            SupportSet::from_cells(space, CellSet::from_indices(least)).unwrap()
        );
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(1).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(5).len(), 120);
    }
}

use std::collections::BTreeSet;

use serde::{Serialize, Serializer};

use super::geometry::{l1, CenteredBox};
use super::pattern::PatternZd;
use crate::error::{Error, Result};
use crate::words::Letter;

/// Largest ball whose `2^cells` patterns will be enumerated.
pub const MAX_BALL_CELLS: usize = 20;

/// Offsets of the L1 ball of radius `r` in `Z^d`, lexicographically sorted.
pub fn l1_ball_offsets(dim: usize, r: u32) -> Vec<Vec<i64>> {
    let cube = CenteredBox::new(dim, 2 * u64::from(r) + 1);
    (0..cube.len())
        .map(|i| cube.coords(i))
        .filter(|c| l1(c) <= i64::from(r))
        .collect()
}

/// Ball pattern around `center`, bit `i` holding the letter at `offsets[i]`.
pub fn ball_code(point: impl Fn(&[i64]) -> Letter, center: &[i64], offsets: &[Vec<i64>]) -> u64 {
    let mut cell = vec![0; center.len()];
    offsets.iter().enumerate().fold(0u64, |code, (i, off)| {
        for ((c, a), b) in cell.iter_mut().zip(center).zip(off) {
            *c = a + b;
        }
        code | (u64::from(point(&cell).bit()) << i)
    })
}

/// Radius-`r` ball patterns absent from every listed periodic point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenSet {
    pub dim: usize,
    pub radius: u32,
    pub offsets: Vec<Vec<i64>>,
    patterns: BTreeSet<u64>,
}

impl ForbiddenSet {
    pub fn contains(&self, code: u64) -> bool {
        self.patterns.contains(&code)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = u64> + '_ {
        self.patterns.iter().copied()
    }

    /// Letters in offset order.
    pub fn render(&self, code: u64) -> String {
        (0..self.offsets.len())
            .map(|i| if code >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl Serialize for ForbiddenSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dim: usize,
            radius: u32,
            offsets: &'a [Vec<i64>],
            count: usize,
            patterns: Vec<String>,
        }
        Repr {
            dim: self.dim,
            radius: self.radius,
            offsets: &self.offsets,
            count: self.len(),
            patterns: self.codes().map(|c| self.render(c)).collect(),
        }
        .serialize(s)
    }
}

fn ball_for(dim: usize, r: u32) -> Result<Vec<Vec<i64>>> {
    let offsets = l1_ball_offsets(dim, r);
    if offsets.len() > MAX_BALL_CELLS {
        return Err(Error::EnumerationCap {
            cells: offsets.len(),
            cap: MAX_BALL_CELLS,
        });
    }
    Ok(offsets)
}

/// Every radius-`r` ball pattern seen in the orbits of the points `x_P`,
/// found by scanning one period box of each.
pub fn occurring_patterns(points: &[&PatternZd], dim: usize, r: u32) -> Result<BTreeSet<u64>> {
    let offsets = ball_for(dim, r)?;
    let mut seen = BTreeSet::new();
    for p in points {
        if p.dim() != dim {
            return Err(Error::Config(format!(
                "point of dimension {} in a dimension-{dim} scan",
                p.dim()
            )));
        }
        let period = p.shape();
        for i in 0..period.len() {
            let center = period.coords(i);
            seen.insert(ball_code(|c| p.periodic_letter(c), &center, &offsets));
        }
    }
    Ok(seen)
}

pub fn forbidden_patterns(points: &[&PatternZd], dim: usize, r: u32) -> Result<ForbiddenSet> {
    let offsets = ball_for(dim, r)?;
    let seen = occurring_patterns(points, dim, r)?;
    let patterns = (0..1u64 << offsets.len())
        .filter(|c| !seen.contains(c))
        .collect();
    Ok(ForbiddenSet {
        dim,
        radius: r,
        offsets,
        patterns,
    })
}

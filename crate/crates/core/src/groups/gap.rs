use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use super::forbidden::{ball_code, forbidden_patterns, l1_ball_offsets};
use super::geometry::CenteredBox;
use super::pattern::{PatternFamily, PatternZd};
use crate::error::{Error, Result};

/// Both gap bullets for one pattern `P_{n,a}`, with distances measured in
/// the L1 metric from a cell to the center of the nearest copy of `P_{k,0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub k: usize,
    pub n: usize,
    pub parity: u8,
    pub r: u32,
    /// `R`, the L1 diameter of `T_{k+1}`.
    #[serde(rename = "R")]
    pub big_r: i64,
    /// Copies of `P_{k,0}` lying inside `P_{n,a}`.
    pub appearances: usize,
    pub forbidden_count: usize,
    /// Cells within `2r` of the complement of `T_n`.
    pub boundary_cells: usize,
    pub boundary_max: Option<i64>,
    pub boundary_witness: Option<Vec<i64>>,
    pub boundary_ok: bool,
    /// Cells where a forbidden pattern sits with its whole ball inside `T_n`.
    pub forbidden_cells: usize,
    pub forbidden_max: Option<i64>,
    pub forbidden_witness: Option<Vec<i64>>,
    pub forbidden_ok: bool,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.boundary_ok && self.forbidden_ok
    }
}

/// Centers `t` with `t + T_k ⊂ T_n` and `P_n` agreeing with `P_k` on `t + T_k`.
fn appearances(host: &PatternZd, target: &PatternZd) -> Vec<bool> {
    let outer = host.shape();
    let inner = target.shape();
    let slack = outer.half() - inner.half();
    let dim = outer.dim;
    (0..outer.len())
        .into_par_iter()
        .map_init(
            || (vec![0i64; dim], vec![0i64; dim], vec![0i64; dim]),
            |(t, s, cell), idx| {
                outer.coords_into(idx, t);
                if t.iter().any(|c| c.abs() > slack) {
                    return false;
                }
                (0..inner.len()).all(|j| {
                    inner.coords_into(j, s);
                    for ((c, a), b) in cell.iter_mut().zip(t.iter()).zip(s.iter()) {
                        *c = a + b;
                    }
                    host.get(cell) == Some(target.letters()[j])
                })
            },
        )
        .collect()
}

/// L1 distance inside the box to the nearest marked cell.
fn distances(shape: CenteredBox, sources: &[bool]) -> Vec<Option<i64>> {
    let mut dist: Vec<Option<i64>> = vec![None; sources.len()];
    let mut queue = VecDeque::new();
    for (i, _) in sources.iter().enumerate().filter(|(_, &s)| s) {
        dist[i] = Some(0);
        queue.push_back(i);
    }
    let mut cell = vec![0i64; shape.dim];
    while let Some(i) = queue.pop_front() {
        let d = dist[i].unwrap();
        shape.coords_into(i, &mut cell);
        for axis in 0..shape.dim {
            for step in [-1, 1] {
                cell[axis] += step;
                if let Some(j) = shape.index(&cell) {
                    if dist[j].is_none() {
                        dist[j] = Some(d + 1);
                        queue.push_back(j);
                    }
                }
                cell[axis] -= step;
            }
        }
    }
    dist
}

#[derive(Default)]
struct Worst {
    cells: usize,
    max: Option<i64>,
    witness: Option<Vec<i64>>,
    unreachable: bool,
}

impl Worst {
    fn record(&mut self, d: Option<i64>, cell: &[i64]) {
        self.cells += 1;
        match d {
            None => {
                if !self.unreachable {
                    self.unreachable = true;
                    self.witness = Some(cell.to_vec());
                }
            }
            Some(d) if !self.unreachable && self.max.is_none_or(|m| d > m) => {
                self.max = Some(d);
                self.witness = Some(cell.to_vec());
            }
            Some(d) => self.max = Some(self.max.map_or(d, |m| m.max(d))),
        }
    }

    fn ok(&self, bound: i64) -> bool {
        !self.unreachable && self.max.is_none_or(|m| m <= bound)
    }
}

/// Scans `P_{n,0}` and `P_{n,1}` exhaustively for both gap bullets at level `k`:
/// cells within `2r` of the outside must be within `R` of a copy of
/// `P_{k,0}`, and cells showing a pattern forbidden for the points
/// `x_{P_{j,a}}`, `j < k`, must be within `R + r` of one.
pub fn verify_gap_property(family: &PatternFamily, k: usize, n: usize, r: u32) -> Result<Vec<GapReport>> {
    if k >= n || n > family.depth() {
        return Err(Error::Config(format!(
            "gap check needs k < n ≤ {}, got k = {k}, n = {n}",
            family.depth()
        )));
    }
    let dim = family.chain().dim();
    let big_r = dim as i64 * (family.chain().modulus(k + 1) as i64 - 1);
    let lower: Vec<&PatternZd> = (0..k)
        .flat_map(|j| [0u8, 1].map(|a| family.pattern(j, a)))
        .collect::<Result<_>>()?;
    let forbidden = forbidden_patterns(&lower, dim, r)?;
    let offsets = l1_ball_offsets(dim, r);
    let target = family.pattern(k, 0)?;
    let band = 2 * i64::from(r);
    let ri = i64::from(r);
    [0u8, 1]
        .into_iter()
        .map(|parity| {
            let host = family.pattern(n, parity)?;
            let shape = host.shape();
            let marks = appearances(host, target);
            let dist = distances(shape, &marks);
            let (mut boundary, mut inside) = (Worst::default(), Worst::default());
            let mut cell = vec![0i64; dim];
            for (i, &d) in dist.iter().enumerate() {
                shape.coords_into(i, &mut cell);
                let to_outside = shape.distance_to_outside(&cell);
                if to_outside <= band {
                    boundary.record(d, &cell);
                }
                if to_outside > ri {
                    let code = ball_code(|c| host.get(c).unwrap(), &cell, &offsets);
                    if forbidden.contains(code) {
                        inside.record(d, &cell);
                    }
                }
            }
            Ok(GapReport {
                k,
                n,
                parity,
                r,
                big_r,
                appearances: marks.iter().filter(|&&m| m).count(),
                forbidden_count: forbidden.len(),
                boundary_ok: boundary.ok(big_r),
                boundary_cells: boundary.cells,
                boundary_max: boundary.max,
                boundary_witness: boundary.witness,
                forbidden_ok: inside.ok(big_r + ri),
                forbidden_cells: inside.cells,
                forbidden_max: inside.max,
                forbidden_witness: inside.witness,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::chain::{build_chain, ChainSpec};
    use crate::groups::pattern::build_pattern_family;

    #[test]
    fn bfs_distances() {
        let shape = CenteredBox::new(2, 5);
        let mut marks = vec![false; 25];
        marks[shape.index(&[0, 0]).unwrap()] = true;
        let d = distances(shape, &marks);
        assert_eq!(d[shape.index(&[2, 2]).unwrap()], Some(4));
        assert_eq!(d[shape.index(&[-1, 2]).unwrap()], Some(3));
        assert!(distances(shape, &[false; 25]).iter().all(Option::is_none));
    }

    #[test]
    fn small_chain() {
        let chain = build_chain(ChainSpec::new(2, vec![5, 7])).unwrap();
        let fam = build_pattern_family(&chain, 2).unwrap();
        for report in verify_gap_property(&fam, 1, 2, 1).unwrap() {
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.big_r, 2 * 34);
            assert!(report.appearances > 0);
        }
        let k0 = verify_gap_property(&fam, 0, 1, 1).unwrap();
        assert!(k0.iter().all(|r| r.boundary_ok));
        assert!(verify_gap_property(&fam, 2, 2, 1).is_err());
    }
}

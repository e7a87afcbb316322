use serde::Serialize;

use super::chain::Chain;
use super::geometry::{centered_residue, CenteredBox};
use crate::error::{Error, Result};
use crate::words::Letter;

/// A pattern `P ∈ A^{T_i}` on the centered box of side `M_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternZd {
    level: usize,
    parity: u8,
    shape: CenteredBox,
    letters: Vec<Letter>,
}

impl PatternZd {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    /// `M_i`, both the side of the support and the period of `x_P`.
    pub fn side(&self) -> u64 {
        self.shape.side
    }

    pub fn shape(&self) -> CenteredBox {
        self.shape
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn get(&self, cell: &[i64]) -> Option<Letter> {
        self.shape.index(cell).map(|i| self.letters[i])
    }

    /// Letter of the periodic point `x_P` at `cell`: `cell = g + t` with
    /// `g ∈ (M_i Z)^d`, `t ∈ T_i`, and `x_P(cell) = P(t)`.
    pub fn periodic_letter(&self, cell: &[i64]) -> Letter {
        let side = self.shape.side as usize;
        let h = self.shape.half();
        let idx = cell.iter().fold(0usize, |acc, &c| {
            acc * side + (centered_residue(c, self.shape.side) + h) as usize
        });
        self.letters[idx]
    }

    /// Cells of the common support where the two patterns differ.
    pub fn diff(&self, other: &PatternZd) -> Result<Vec<Vec<i64>>> {
        if self.shape != other.shape {
            return Err(Error::Config(format!(
                "patterns on boxes of side {} and {} are not comparable",
                self.shape.side, other.shape.side
            )));
        }
        Ok(self
            .letters
            .iter()
            .zip(&other.letters)
            .enumerate()
            .filter(|(_, (p, q))| p != q)
            .map(|(i, _)| self.shape.coords(i))
            .collect())
    }

    pub fn count_ones(&self) -> usize {
        self.letters.iter().filter(|&&l| l == Letter::One).count()
    }

    pub fn summary(&self) -> PatternSummary {
        PatternSummary {
            level: self.level,
            parity: self.parity,
            side: self.shape.side,
            cells: self.letters.len(),
            ones: self.count_ones(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternSummary {
    pub level: usize,
    pub parity: u8,
    pub side: u64,
    pub cells: usize,
    pub ones: usize,
}

/// `P_{i,0}, P_{i,1}` for `0 ≤ i ≤ depth`, built on a chain.
#[derive(Clone, Debug)]
pub struct PatternFamily {
    chain: Chain,
    patterns: Vec<[PatternZd; 2]>,
}

impl PatternFamily {
    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn depth(&self) -> usize {
        self.patterns.len() - 1
    }

    pub fn pattern(&self, level: usize, parity: u8) -> Result<&PatternZd> {
        self.patterns
            .get(level)
            .and_then(|p| p.get(usize::from(parity)))
            .ok_or_else(|| {
                Error::Config(format!(
                    "pattern ({level}, {parity}) not built; depth is {}",
                    self.depth()
                ))
            })
    }
}

/// Assembles `P_{i+1,a}` cell by cell. Each `m_{i+1}`-grid cell `v` is a
/// copy of `T_i` and carries `P_{i,a}` at `v = 0`, the restriction of
/// `x_{P_{j,a'}}` inside ball `B_{j,a'}`, and `P_{i,0}` elsewhere.
fn next_level(chain: &Chain, below: &[[PatternZd; 2]], parity: u8) -> PatternZd {
    let i = below.len() - 1;
    let level = i + 1;
    let dim = chain.dim();
    let layout = chain.layout(level).expect("layout for every built level");
    let owners = layout.cell_owners(dim);
    let grid = CenteredBox::new(dim, layout.grid_side);
    let step = chain.modulus(i);
    let shape = CenteredBox::new(dim, chain.modulus(level));
    let mut cell = vec![0i64; dim];
    let mut t = vec![0i64; dim];
    let mut v = vec![0i64; dim];
    let letters = (0..shape.len())
        .map(|idx| {
            shape.coords_into(idx, &mut cell);
            for ((tc, vc), &c) in t.iter_mut().zip(v.iter_mut()).zip(&cell) {
                *tc = centered_residue(c, step);
                *vc = (c - *tc) / step as i64;
            }
            if v.iter().all(|&c| c == 0) {
                return below[i][usize::from(parity)].get(&t).unwrap();
            }
            match owners[grid.index(&v).unwrap()] {
                Some((j, a)) => below[j][usize::from(a)].periodic_letter(&cell),
                None => below[i][0].get(&t).unwrap(),
            }
        })
        .collect();
    PatternZd {
        level,
        parity,
        shape,
        letters,
    }
}

pub fn build_pattern_family(chain: &Chain, depth: usize) -> Result<PatternFamily> {
    if depth > chain.depth() {
        return Err(Error::Config(format!(
            "depth {depth} exceeds the chain's {} scales",
            chain.depth()
        )));
    }
    let unit = CenteredBox::new(chain.dim(), 1);
    let mut patterns = vec![[0u8, 1].map(|a| PatternZd {
        level: 0,
        parity: a,
        shape: unit,
        letters: vec![Letter::from_bit(a).unwrap()],
    })];
    for _ in 0..depth {
        let next = [0u8, 1].map(|a| next_level(chain, &patterns, a));
        patterns.push(next);
    }
    Ok(PatternFamily {
        chain: chain.clone(),
        patterns,
    })
}

/// Axis-aligned box `lower ≤ cell ≤ upper` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridBox {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl GridBox {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::Config(format!("empty box {lower:?}..{upper:?}")));
        }
        Ok(GridBox { lower, upper })
    }

    /// `[-radius, radius]^d`.
    pub fn centered(dim: usize, radius: i64) -> Self {
        GridBox {
            lower: vec![-radius; dim],
            upper: vec![radius; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn extents(&self) -> Vec<usize> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l + 1) as usize)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.extents().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        cell.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(c, (l, u))| l <= c && c <= u)
    }

    fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        let ext = self.extents();
        for (j, slot) in out.iter_mut().enumerate().rev() {
            *slot = self.lower[j] + (idx % ext[j]) as i64;
            idx /= ext[j];
        }
    }

    fn index(&self, cell: &[i64]) -> Option<usize> {
        if !self.contains(cell) {
            return None;
        }
        let ext = self.extents();
        Some(
            cell.iter()
                .enumerate()
                .fold(0usize, |acc, (j, c)| acc * ext[j] + (c - self.lower[j]) as usize),
        )
    }

    fn within(&self, shape: CenteredBox) -> bool {
        self.dim() == shape.dim && shape.contains(&self.lower) && shape.contains(&self.upper)
    }
}

/// Letters of a point of `A^{Z^d}` on a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxWindow {
    pub region: GridBox,
    pub letters: Vec<Letter>,
}

impl BoxWindow {
    pub fn get(&self, cell: &[i64]) -> Option<Letter> {
        self.region.index(cell).map(|i| self.letters[i])
    }

    pub fn diff(&self, other: &BoxWindow) -> Result<Vec<Vec<i64>>> {
        if self.region != other.region {
            return Err(Error::Config("windows on different boxes".into()));
        }
        let mut cell = vec![0; self.region.dim()];
        let mut out = Vec::new();
        for (i, (p, q)) in self.letters.iter().zip(&other.letters).enumerate() {
            if p != q {
                self.region.coords_into(i, &mut cell);
                out.push(cell.clone());
            }
        }
        Ok(out)
    }
}

/// Window of `x_P` on `region`.
pub fn periodic_point_window(pattern: &PatternZd, region: &GridBox) -> Result<BoxWindow> {
    if region.dim() != pattern.dim() {
        return Err(Error::Config(format!(
            "box of dimension {} for a pattern of dimension {}",
            region.dim(),
            pattern.dim()
        )));
    }
    let mut cell = vec![0; region.dim()];
    let letters = (0..region.len())
        .map(|i| {
            region.coords_into(i, &mut cell);
            pattern.periodic_letter(&cell)
        })
        .collect();
    Ok(BoxWindow {
        region: region.clone(),
        letters,
    })
}

/// `M e_1, …, M e_d`, generators of `(M Z)^d`.
pub fn lattice_generators(dim: usize, modulus: u64) -> Vec<Vec<i64>> {
    (0..dim)
        .map(|j| {
            let mut g = vec![0; dim];
            g[j] = modulus as i64;
            g
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicityReport {
    pub level: usize,
    pub parity: u8,
    pub region: GridBox,
    pub generators: Vec<Vec<i64>>,
    pub pairs_checked: usize,
    pub periodic: bool,
    /// `(cell, generator)` where `x(cell) ≠ x(cell + generator)`.
    pub first_failure: Option<(Vec<i64>, Vec<i64>)>,
}

/// Checks `x(h) = x(h + g)` for every generator `g` and every `h` with both
/// cells in the window of `x_P` on `region`.
pub fn verify_periodicity(
    pattern: &PatternZd,
    region: &GridBox,
    generators: &[Vec<i64>],
) -> Result<PeriodicityReport> {
    let window = periodic_point_window(pattern, region)?;
    let mut report = PeriodicityReport {
        level: pattern.level(),
        parity: pattern.parity(),
        region: region.clone(),
        generators: generators.to_vec(),
        pairs_checked: 0,
        periodic: true,
        first_failure: None,
    };
    let mut cell = vec![0; region.dim()];
    let mut moved = vec![0; region.dim()];
    'outer: for g in generators {
        if g.len() != region.dim() {
            return Err(Error::Config(format!("generator {g:?} has the wrong dimension")));
        }
        for i in 0..region.len() {
            region.coords_into(i, &mut cell);
            for ((m, c), s) in moved.iter_mut().zip(&cell).zip(g) {
                *m = c + s;
            }
            if let Some(other) = window.get(&moved) {
                report.pairs_checked += 1;
                if other != window.letters[i] {
                    report.periodic = false;
                    report.first_failure = Some((cell.clone(), g.clone()));
                    break 'outer;
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLimitPair {
    pub level: usize,
    pub x: BoxWindow,
    pub y: BoxWindow,
    pub diff: Vec<Vec<i64>>,
    /// Whether level `level + 1` gives the same windows, when that level is built.
    pub stabilized: Option<bool>,
}

/// Windows of `x_{P_{n,0}}` and `x_{P_{n,1}}` around the identity.
pub fn group_limit_pair(family: &PatternFamily, level: usize, region: &GridBox) -> Result<GroupLimitPair> {
    let p0 = family.pattern(level, 0)?;
    let p1 = family.pattern(level, 1)?;
    if !region.within(p0.shape()) {
        return Err(Error::Config(format!(
            "box {:?}..{:?} is not inside T_{level}",
            region.lower, region.upper
        )));
    }
    let x = periodic_point_window(p0, region)?;
    let y = periodic_point_window(p1, region)?;
    let diff = x.diff(&y)?;
    if diff != [vec![0; region.dim()]] {
        return Err(Error::PostCondition(format!(
            "limit windows should differ only at the identity, differ at {diff:?}"
        )));
    }
    let stabilized = if level < family.depth() {
        let nx = periodic_point_window(family.pattern(level + 1, 0)?, region)?;
        let ny = periodic_point_window(family.pattern(level + 1, 1)?, region)?;
        Some(nx == x && ny == y)
    } else {
        None
    };
    Ok(GroupLimitPair {
        level,
        x,
        y,
        diff,
        stabilized,
    })
}

/// Binary PGM (P5) of a planar pattern: letter 0 white, letter 1 black,
/// axis 0 downwards, each cell drawn as a `scale × scale` square.
pub fn export_pgm(pattern: &PatternZd, scale: usize) -> Result<Vec<u8>> {
    if pattern.dim() != 2 {
        return Err(Error::Config(format!(
            "PGM export needs a planar pattern, got dimension {}",
            pattern.dim()
        )));
    }
    if scale == 0 {
        return Err(Error::Config("PGM scale must be positive".into()));
    }
    let side = pattern.side() as usize;
    let px = side * scale;
    let mut out = format!("P5\n{px} {px}\n255\n").into_bytes();
    out.reserve(px * px);
    for row in pattern.letters().chunks(side) {
        let line: Vec<u8> = row
            .iter()
            .flat_map(|&l| {
                let gray = if l == Letter::Zero { 255 } else { 0 };
                std::iter::repeat_n(gray, scale)
            })
            .collect();
        for _ in 0..scale {
            out.extend_from_slice(&line);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::chain::{build_chain, ChainSpec};

    fn family(scales: Vec<u64>) -> PatternFamily {
        let chain = build_chain(ChainSpec::new(2, scales.clone())).unwrap();
        build_pattern_family(&chain, scales.len()).unwrap()
    }

    #[test]
    fn level_one_by_hand() {
        let fam = family(vec![5]);
        let layout = fam.chain().layout(1).unwrap();
        for a in 0..2u8 {
            let p = fam.pattern(1, a).unwrap();
            for x in -2..=2i64 {
                for y in -2..=2i64 {
                    let cell = [x, y];
                    let expect = if cell == [0, 0] {
                        a
                    } else {
                        layout
                            .balls
                            .iter()
                            .find(|b| b.ball.center == cell)
                            .map_or(0, |b| b.a)
                    };
                    assert_eq!(p.get(&cell).unwrap().bit(), expect, "{cell:?}");
                }
            }
        }
    }

    #[test]
    fn parities_differ_only_at_identity() {
        let fam = family(vec![5, 7]);
        for n in 0..=2 {
            let d = fam.pattern(n, 0).unwrap().diff(fam.pattern(n, 1).unwrap()).unwrap();
            assert_eq!(d, [vec![0, 0]]);
        }
        assert_eq!(fam.pattern(0, 1).unwrap().letters(), [Letter::One]);
    }

    #[test]
    fn periodic_windows() {
        let fam = family(vec![5]);
        let p = fam.pattern(1, 0).unwrap();
        let region = GridBox::centered(2, 5);
        let w = periodic_point_window(p, &region).unwrap();
        for x in -5..=0i64 {
            for y in -5..=5i64 {
                assert_eq!(w.get(&[x, y]), w.get(&[x + 5, y]));
            }
        }
        let report = verify_periodicity(p, &region, &lattice_generators(2, 5)).unwrap();
        assert!(report.periodic);
        assert_eq!(report.pairs_checked, 2 * 6 * 11);
        let report = verify_periodicity(p, &region, &[vec![1, 0]]).unwrap();
        assert!(!report.periodic);
    }

    #[test]
    fn limit_pair() {
        let fam = family(vec![5, 7, 9]);
        let region = GridBox::centered(2, 2);
        let pair = group_limit_pair(&fam, 2, &region).unwrap();
        assert_eq!(pair.diff, [vec![0, 0]]);
        assert_eq!(pair.stabilized, Some(true));
        assert!(group_limit_pair(&fam, 1, &GridBox::centered(2, 3)).is_err());
        let unit = GridBox::centered(2, 0);
        assert_eq!(group_limit_pair(&fam, 0, &unit).unwrap().diff, [vec![0, 0]]);
    }

    #[test]
    fn pgm_layout() {
        let fam = family(vec![5]);
        let img = export_pgm(fam.pattern(1, 1).unwrap(), 2).unwrap();
        let header = b"P5\n10 10\n255\n";
        assert_eq!(&img[..header.len()], header);
        let body = &img[header.len()..];
        assert_eq!(body.len(), 100);
        // identity cell (row 2, column 2) is a 1, drawn black
        assert_eq!(body[4 * 10 + 4], 0);
        assert_eq!(body[0], 255);
    }
}

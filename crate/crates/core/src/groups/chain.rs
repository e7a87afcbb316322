use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::Serialize;

use super::geometry::{l1, CenteredBox};
use crate::error::{Error, Result};

/// Largest transversal the chain builder will enumerate cell by cell.
pub const DEFAULT_CELL_CAP: usize = 50_000_000;

/// Minimum gaps, in empty grid cells, enforced by layout validation.
///
/// A gap of 0 means touching; a negative gap means overlap (or, for the
/// boundary, sticking out of the box).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Separations {
    pub ball_ball: i64,
    pub ball_boundary: i64,
    pub ball_identity: i64,
}

impl Default for Separations {
    fn default() -> Self {
        Separations {
            ball_ball: 1,
            ball_boundary: 1,
            ball_identity: 0,
        }
    }
}

/// Which pattern a ball carries: `P_{j,a}` inside `T_level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BallKey {
    pub level: usize,
    pub j: usize,
    pub a: u8,
}

/// A box of `side^d` grid cells centered at `center`, in units of `M_{level-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ball {
    pub center: Vec<i64>,
    pub side: u64,
}

impl Ball {
    pub fn new(center: Vec<i64>, side: u64) -> Self {
        Ball { center, side }
    }

    fn half(&self) -> i64 {
        (self.side as i64 - 1) / 2
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        let h = self.half();
        self.center
            .iter()
            .zip(cell)
            .all(|(c, v)| (c - v).abs() <= h)
    }
}

fn ball_gap(p: &Ball, q: &Ball) -> i64 {
    p.center
        .iter()
        .zip(&q.center)
        .map(|(a, b)| (a - b).abs() - p.half() - q.half())
        .max()
        .unwrap_or(0)
        - 1
}

fn boundary_gap(ball: &Ball, grid_half: i64) -> i64 {
    ball.center
        .iter()
        .map(|c| grid_half - c.abs() - ball.half())
        .min()
        .unwrap_or(0)
}

fn identity_gap(ball: &Ball) -> i64 {
    ball.center
        .iter()
        .map(|c| c.abs() - ball.half())
        .max()
        .unwrap_or(0)
        - 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainSpec {
    pub dim: usize,
    /// `m_1, m_2, …`; `M_i = m_1 ⋯ m_i`.
    pub scales: Vec<u64>,
    /// Explicit ball placements. Levels without entries are laid out automatically.
    pub layout: BTreeMap<BallKey, Ball>,
    pub separations: Separations,
}

impl ChainSpec {
    pub fn new(dim: usize, scales: Vec<u64>) -> Self {
        ChainSpec {
            dim,
            scales,
            layout: BTreeMap::new(),
            separations: Separations::default(),
        }
    }

    pub fn with_ball(mut self, level: usize, j: usize, a: u8, ball: Ball) -> Self {
        self.layout.insert(BallKey { level, j, a }, ball);
        self
    }

    pub fn depth(&self) -> usize {
        self.scales.len()
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_ball(key: &str, value: &str) -> Result<Ball> {
    let (center, side) = match value.split_once('@') {
        Some((c, s)) => (c, parse_num(key, s)?),
        None => (value, 1),
    };
    let center = center
        .split(',')
        .map(|c| parse_num(key, c))
        .collect::<Result<Vec<i64>>>()?;
    Ok(Ball { center, side })
}

/// `key=value` lines; `#` starts a comment.
///
/// ```text
/// d=2
/// scales=5,7,9
/// sep.ball_ball=1
/// ball.2.0.1=-2,0@1
/// ```
impl FromStr for ChainSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut scales = None;
        let mut separations = Separations::default();
        let mut layout = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            match key {
                "d" => dim = Some(parse_num(key, value)?),
                "scales" => {
                    scales = Some(
                        value
                            .split(',')
                            .map(|s| parse_num(key, s))
                            .collect::<Result<Vec<u64>>>()?,
                    )
                }
                "sep.ball_ball" => separations.ball_ball = parse_num(key, value)?,
                "sep.ball_boundary" => separations.ball_boundary = parse_num(key, value)?,
                "sep.ball_identity" => separations.ball_identity = parse_num(key, value)?,
                _ if key.starts_with("ball.") => {
                    let parts: Vec<&str> = key.split('.').collect();
                    if parts.len() != 4 {
                        return Err(Error::Config(format!(
                            "line {}: ball keys look like ball.<level>.<j>.<a>",
                            lineno + 1
                        )));
                    }
                    let ball_key = BallKey {
                        level: parse_num(key, parts[1])?,
                        j: parse_num(key, parts[2])?,
                        a: parse_num(key, parts[3])?,
                    };
                    layout.insert(ball_key, parse_ball(key, value)?);
                }
                _ => {
                    return Err(Error::Config(format!("line {}: unknown key {key}", lineno + 1)))
                }
            }
        }
        Ok(ChainSpec {
            dim: dim.ok_or_else(|| Error::Config("missing key d".into()))?,
            scales: scales.ok_or_else(|| Error::Config("missing key scales".into()))?,
            layout,
            separations,
        })
    }
}

/// Coset representatives `T_i` of `G_i = (M_i Z)^d` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transversal {
    pub level: usize,
    /// `M_i`; `T_i` is the centered box of this side.
    pub modulus: u64,
    /// `M_{i-1}`: the step representatives are `M_{i-1} · v`.
    pub step: u64,
    pub scale: u64,
    pub cell_count: usize,
    /// `R_i` in greedy pick order.
    pub step_reps: Vec<Vec<i64>>,
}

impl Transversal {
    pub fn cells(&self, dim: usize) -> CenteredBox {
        CenteredBox::new(dim, self.modulus)
    }
}

/// Greedy closest-to-identity representatives of `G_{i-1} / G_i`: scan
/// `M_{i-1} Z^d` by (L1 norm, lexicographic) and keep each new coset.
fn greedy_step_reps(dim: usize, step: u64, scale: u64) -> Vec<Vec<i64>> {
    let search = CenteredBox::new(dim, 2 * scale + 1);
    let mut candidates: Vec<Vec<i64>> = (0..search.len())
        .map(|i| {
            search
                .coords(i)
                .into_iter()
                .map(|v| v * step as i64)
                .collect()
        })
        .collect();
    candidates.sort_by(|p, q| l1(p).cmp(&l1(q)).then_with(|| p.cmp(q)));
    let modulus = (step * scale) as i64;
    let target = (0..dim).fold(1usize, |acc, _| acc * scale as usize);
    let mut taken = BTreeSet::new();
    let mut reps = Vec::with_capacity(target);
    for c in candidates {
        let class: Vec<i64> = c.iter().map(|v| v.rem_euclid(modulus)).collect();
        if taken.insert(class) {
            reps.push(c);
            if reps.len() == target {
                break;
            }
        }
    }
    reps
}

/// Checks that `T_i = R_i + T_{i-1}` hits every cell of the centered box exactly once.
fn check_sumset(dim: usize, reps: &[Vec<i64>], prev: CenteredBox, next: CenteredBox) -> Result<()> {
    let mut hits = vec![0u8; next.len()];
    let mut t = vec![0i64; dim];
    let mut cell = vec![0i64; dim];
    for r in reps {
        for idx in 0..prev.len() {
            prev.coords_into(idx, &mut t);
            for ((c, a), b) in cell.iter_mut().zip(r).zip(&t) {
                *c = a + b;
            }
            let slot = next.index(&cell).ok_or_else(|| {
                Error::PostCondition(format!("R + T_prev leaves T at {cell:?}"))
            })?;
            hits[slot] += 1;
            if hits[slot] > 1 {
                return Err(Error::PostCondition(format!("cell {cell:?} covered twice")));
            }
        }
    }
    if let Some(miss) = hits.iter().position(|&h| h == 0) {
        return Err(Error::PostCondition(format!(
            "cell {:?} not covered",
            next.coords(miss)
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlacedBall {
    pub j: usize,
    pub a: u8,
    pub ball: Ball,
}

/// Smallest gaps realized by a level's layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AchievedSeparations {
    pub ball_ball: Option<i64>,
    pub ball_boundary: Option<i64>,
    pub ball_identity: Option<i64>,
}

/// Ball placement inside `T_level`, on the grid of `m_level^d` copies of `T_{level-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelLayout {
    pub level: usize,
    pub grid_side: u64,
    pub automatic: bool,
    pub balls: Vec<PlacedBall>,
    pub achieved: AchievedSeparations,
}

impl LevelLayout {
    /// For each grid cell, the `(j, a)` of the ball covering it.
    pub fn cell_owners(&self, dim: usize) -> Vec<Option<(usize, u8)>> {
        let grid = CenteredBox::new(dim, self.grid_side);
        let mut cell = vec![0; dim];
        (0..grid.len())
            .map(|idx| {
                grid.coords_into(idx, &mut cell);
                self.balls
                    .iter()
                    .find(|b| b.ball.contains(&cell))
                    .map(|b| (b.j, b.a))
            })
            .collect()
    }
}

fn achieved(balls: &[PlacedBall], grid_half: i64) -> AchievedSeparations {
    let pairs = balls
        .iter()
        .enumerate()
        .flat_map(|(i, p)| balls[i + 1..].iter().map(move |q| ball_gap(&p.ball, &q.ball)));
    AchievedSeparations {
        ball_ball: pairs.min(),
        ball_boundary: balls.iter().map(|b| boundary_gap(&b.ball, grid_half)).min(),
        ball_identity: balls.iter().map(|b| identity_gap(&b.ball)).min(),
    }
}

fn violations(level: usize, dim: usize, grid_half: i64, balls: &[PlacedBall], sep: &Separations) -> Vec<String> {
    let mut out = Vec::new();
    let mut malformed = false;
    for b in balls {
        let name = format!("level {level} ball ({}, {})", b.j, b.a);
        if b.ball.center.len() != dim {
            out.push(format!("{name}: center has {} coordinates, expected {dim}", b.ball.center.len()));
            malformed = true;
            continue;
        }
        if b.ball.side % 2 == 0 {
            out.push(format!("{name}: side {} is not odd", b.ball.side));
            malformed = true;
            continue;
        }
        let g = boundary_gap(&b.ball, grid_half);
        if g < sep.ball_boundary {
            out.push(format!("{name}: boundary gap {g} < {}", sep.ball_boundary));
        }
        let g = identity_gap(&b.ball);
        if g < sep.ball_identity {
            out.push(format!("{name}: identity gap {g} < {}", sep.ball_identity));
        }
    }
    if malformed {
        return out;
    }
    for (i, p) in balls.iter().enumerate() {
        for q in &balls[i + 1..] {
            let g = ball_gap(&p.ball, &q.ball);
            if g < sep.ball_ball {
                out.push(format!(
                    "level {level} balls ({}, {}) and ({}, {}): gap {g} < {}",
                    p.j, p.a, q.j, q.a, sep.ball_ball
                ));
            }
        }
    }
    out
}

/// Places unit balls in order `(0,0), (0,1), (1,0), …`, each on the first
/// admissible cell by (L∞ norm, lexicographic) order.
fn auto_layout(level: usize, dim: usize, scale: u64, sep: &Separations) -> Result<Vec<PlacedBall>> {
    let grid = CenteredBox::new(dim, scale);
    let grid_half = grid.half();
    let mut candidates: Vec<Vec<i64>> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let linf = |c: &Vec<i64>| c.iter().map(|v| v.abs()).max().unwrap_or(0);
    candidates.sort_by(|p, q| linf(p).cmp(&linf(q)).then_with(|| p.cmp(q)));
    let mut placed: Vec<PlacedBall> = Vec::new();
    for j in 0..level {
        for a in 0..2u8 {
            let spot = candidates.iter().find(|c| {
                let ball = Ball::new(c.to_vec(), 1);
                boundary_gap(&ball, grid_half) >= sep.ball_boundary
                    && identity_gap(&ball) >= sep.ball_identity
                    && placed.iter().all(|p| ball_gap(&p.ball, &ball) >= sep.ball_ball)
            });
            match spot {
                Some(c) => placed.push(PlacedBall {
                    j,
                    a,
                    ball: Ball::new(c.clone(), 1),
                }),
                None => {
                    return Err(Error::Layout(vec![format!(
                        "level {level}: no room for ball ({j}, {a}) on a {scale}-grid"
                    )]))
                }
            }
        }
    }
    Ok(placed)
}

/// A built subgroup chain: moduli, verified transversals and validated layouts.
#[derive(Clone, Debug, Serialize)]
pub struct Chain {
    pub spec: ChainSpec,
    /// `M_0 = 1, M_1, …, M_depth`.
    pub moduli: Vec<u64>,
    pub transversals: Vec<Transversal>,
    /// `layouts[i]` places the balls inside `T_{i+1}`.
    pub layouts: Vec<LevelLayout>,
}

impl Chain {
    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn depth(&self) -> usize {
        self.spec.depth()
    }

    pub fn modulus(&self, level: usize) -> u64 {
        self.moduli[level]
    }

    pub fn transversal(&self, level: usize) -> Option<&Transversal> {
        level.checked_sub(1).and_then(|i| self.transversals.get(i))
    }

    pub fn layout(&self, level: usize) -> Option<&LevelLayout> {
        level.checked_sub(1).and_then(|i| self.layouts.get(i))
    }
}

pub fn build_chain(spec: ChainSpec) -> Result<Chain> {
    build_chain_capped(spec, DEFAULT_CELL_CAP)
}

pub fn build_chain_capped(spec: ChainSpec, cell_cap: usize) -> Result<Chain> {
    let dim = spec.dim;
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if spec.scales.is_empty() {
        return Err(Error::Config("at least one scale is required".into()));
    }
    if let Some(bad) = spec.scales.iter().find(|&&m| m < 5 || m % 2 == 0) {
        return Err(Error::Config(format!("scale {bad} must be odd and at least 5")));
    }
    let mut moduli = vec![1u64];
    for &m in &spec.scales {
        let next = moduli
            .last()
            .and_then(|p| p.checked_mul(m))
            .filter(|&p| p <= i64::MAX as u64)
            .ok_or_else(|| Error::Config("moduli overflow".into()))?;
        moduli.push(next);
    }
    let top = CenteredBox::new(dim, *moduli.last().unwrap());
    match top.checked_len() {
        Some(cells) if cells <= cell_cap => {}
        other => {
            return Err(Error::EnumerationCap {
                cells: other.unwrap_or(usize::MAX),
                cap: cell_cap,
            })
        }
    }
    for key in spec.layout.keys() {
        if key.level == 0 || key.level > spec.depth() || key.j >= key.level || key.a > 1 {
            return Err(Error::Config(format!(
                "ball ({}, {}) cannot be placed at level {} of a depth-{} chain",
                key.j,
                key.a,
                key.level,
                spec.depth()
            )));
        }
    }

    let mut transversals = Vec::new();
    let mut layouts = Vec::new();
    let mut problems = Vec::new();
    for (i, &scale) in spec.scales.iter().enumerate() {
        let level = i + 1;
        let (step, modulus) = (moduli[i], moduli[level]);
        let reps = greedy_step_reps(dim, step, scale);
        let half = (scale as i64 - 1) / 2;
        let centered = reps.len() == CenteredBox::new(dim, scale).len()
            && reps
                .iter()
                .all(|r| r.iter().all(|v| (v / step as i64).abs() <= half));
        if !centered {
            return Err(Error::PostCondition(format!(
                "greedy representatives at level {level} are not the centered box"
            )));
        }
        check_sumset(
            dim,
            &reps,
            CenteredBox::new(dim, step),
            CenteredBox::new(dim, modulus),
        )?;
        transversals.push(Transversal {
            level,
            modulus,
            step,
            scale,
            cell_count: CenteredBox::new(dim, modulus).len(),
            step_reps: reps,
        });

        let explicit: Vec<PlacedBall> = spec
            .layout
            .iter()
            .filter(|(k, _)| k.level == level)
            .map(|(k, b)| PlacedBall {
                j: k.j,
                a: k.a,
                ball: b.clone(),
            })
            .collect();
        let automatic = explicit.is_empty();
        let balls = if automatic {
            match auto_layout(level, dim, scale, &spec.separations) {
                Ok(b) => b,
                Err(Error::Layout(mut v)) => {
                    problems.append(&mut v);
                    continue;
                }
                Err(e) => return Err(e),
            }
        } else {
            for j in 0..level {
                for a in 0..2u8 {
                    if !explicit.iter().any(|b| b.j == j && b.a == a) {
                        problems.push(format!("level {level}: ball ({j}, {a}) is not placed"));
                    }
                }
            }
            explicit
        };
        let grid_half = half;
        problems.extend(violations(level, dim, grid_half, &balls, &spec.separations));
        layouts.push(LevelLayout {
            level,
            grid_side: scale,
            automatic,
            achieved: achieved(&balls, grid_half),
            balls,
        });
    }
    if !problems.is_empty() {
        return Err(Error::Layout(problems));
    }
    Ok(Chain {
        spec,
        moduli,
        transversals,
        layouts,
    })
}

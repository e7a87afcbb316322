use serde::Serialize;

use super::dyadic::Dyadic;
use super::window::{slice_distance, DistanceBound, LimitPair, Window};
use crate::error::{Error, Result};
use crate::words::Letter;

/// The shift-invariant closure of `{(x, y), (y, x)}` truncated to shifts
/// `|k| ≤ shift_bound`, plus the diagonal.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientRelationSpec {
    pub pair: LimitPair,
    pub shift_bound: usize,
    pub hop_bound: usize,
}

impl QuotientRelationSpec {
    pub fn new(pair: LimitPair, shift_bound: usize, hop_bound: usize) -> Result<Self> {
        if shift_bound > pair.radius {
            return Err(Error::Config(format!(
                "shift bound {shift_bound} exceeds limit pair radius {}",
                pair.radius
            )));
        }
        Ok(QuotientRelationSpec {
            pair,
            shift_bound,
            hop_bound,
        })
    }

    /// Radius of the windows the relation compares: shifted copies of the
    /// pair must stay inside the pair's own window.
    pub fn window_radius(&self) -> usize {
        self.pair.radius - self.shift_bound
    }
}

/// Precomputed hop nodes `σ^k x`, `σ^k y` for `|k| ≤ K` and, for chains of
/// two or more hops, their pairwise distances.
#[derive(Clone, Debug)]
pub struct QuotientRelation {
    spec: QuotientRelationSpec,
    radius: usize,
    // Node 2i is σ^k x and node 2i+1 is σ^k y for k = i - K.
    nodes: Vec<Vec<Letter>>,
    between_upper: Vec<Dyadic>,
    between_lower: Vec<Dyadic>,
}

impl QuotientRelation {
    pub fn new(spec: QuotientRelationSpec) -> Result<Self> {
        let radius = spec.window_radius();
        let k_max = spec.shift_bound as i64;
        let mut nodes = Vec::with_capacity(2 * (2 * spec.shift_bound + 1));
        for k in -k_max..=k_max {
            nodes.push(spec.pair.x_window.shifted(k, radius)?.letters().to_vec());
            nodes.push(spec.pair.y_window.shifted(k, radius)?.letters().to_vec());
        }
        let count = nodes.len();
        let (mut between_upper, mut between_lower) = (Vec::new(), Vec::new());
        if spec.hop_bound >= 2 {
            between_upper.reserve(count * count);
            between_lower.reserve(count * count);
            for a in &nodes {
                for b in &nodes {
                    let d = slice_distance(a, b);
                    between_upper.push(resolved_upper(&d));
                    between_lower.push(d.lower);
                }
            }
        }
        Ok(QuotientRelation {
            spec,
            radius,
            nodes,
            between_upper,
            between_lower,
        })
    }

    pub fn spec(&self) -> &QuotientRelationSpec {
        &self.spec
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// `(σ^k x, σ^k y)` windows at the relation radius.
    pub fn hop(&self, k: i64) -> Option<(Window, Window)> {
        let i = usize::try_from(k + self.spec.shift_bound as i64).ok()?;
        let x = self.nodes.get(2 * i)?;
        let y = self.nodes.get(2 * i + 1)?;
        Some((
            Window::from_letters(self.radius, x.clone()).ok()?,
            Window::from_letters(self.radius, y.clone()).ok()?,
        ))
    }

    fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Chain bound on the quotient pseudo-distance.
///
/// A chain is `p ~ ν₁ ⇒ ν₁' ~ ν₂ ⇒ ν₂' ~ … ~ q` where each `⇒` is a
/// relation hop between `σ^k x` and `σ^k y` (cost 0) and each `~` costs the
/// Cantor distance. The upper bound is the cheapest chain with at most
/// `hop_bound` hops, the direct distance included. Inside a chain, a leg
/// whose windows agree everywhere counts as 0: the chain has collapsed below
/// the window resolution. The lower bound is the least sum of lower bounds
/// over the same chains.
pub fn quotient_distance(
    p: &Window,
    q: &Window,
    rel: &QuotientRelation,
) -> Result<DistanceBound> {
    for w in [p, q] {
        if w.radius() != rel.radius {
            return Err(Error::RadiusMismatch(w.radius(), rel.radius));
        }
    }
    Ok(chain_bound(p.letters(), q.letters(), rel))
}

pub(crate) fn chain_bound(p: &[Letter], q: &[Letter], rel: &QuotientRelation) -> DistanceBound {
    let direct = slice_distance(p, q);
    let hops = rel.spec.hop_bound;
    if hops == 0 {
        return direct;
    }
    let count = rel.node_count();
    let mut start_u = Vec::with_capacity(count);
    let mut start_l = Vec::with_capacity(count);
    let mut end_u = Vec::with_capacity(count);
    let mut end_l = Vec::with_capacity(count);
    for node in &rel.nodes {
        let s = slice_distance(p, node);
        start_u.push(resolved_upper(&s));
        start_l.push(s.lower);
        let e = slice_distance(node, q);
        end_u.push(resolved_upper(&e));
        end_l.push(e.lower);
    }
    let upper = relax(&start_u, &end_u, &rel.between_upper, hops, direct.upper);
    let lower = relax(&start_l, &end_l, &rel.between_lower, hops, direct.lower);
    DistanceBound { lower, upper }
}

fn resolved_upper(d: &DistanceBound) -> Dyadic {
    if d.lower.is_zero() {
        Dyadic::ZERO
    } else {
        d.upper
    }
}

/// Cheapest chain cost with at most `hops` hops, pruning partial chains that
/// already cost at least the best complete one.
fn relax(start: &[Dyadic], end: &[Dyadic], between: &[Dyadic], hops: usize, direct: Dyadic) -> Dyadic {
    let count = start.len();
    let partner = |v: usize| v ^ 1;
    let mut best = direct;
    let mut arrive = start.to_vec();
    for h in 1..=hops {
        for v in 0..count {
            if arrive[v] < best {
                let total = arrive[v] + end[partner(v)];
                if total < best {
                    best = total;
                }
            }
        }
        if h == hops {
            break;
        }
        let mut next = vec![Dyadic::MAX; count];
        for v in 0..count {
            if arrive[v] >= best {
                continue;
            }
            let row = &between[partner(v) * count..(partner(v) + 1) * count];
            for (w, d) in row.iter().enumerate() {
                let cost = arrive[v] + *d;
                if cost < next[w] {
                    next[w] = cost;
                }
            }
        }
        arrive = next;
    }
    best
}

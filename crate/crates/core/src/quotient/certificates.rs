use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use serde::Serialize;

use super::dyadic::Dyadic;
use super::relation::{chain_bound, QuotientRelation, QuotientRelationSpec};
use super::window::{build_limit_pair, limit_letter, Window};
use crate::error::{Error, Result};
use crate::language::primitive_root;
use crate::words::{Letter, WordFamily};

/// Default window radius for certificate scans.
pub const DEFAULT_RADIUS: usize = 64;

/// Builds the relation used by certificate scans: windows of radius
/// `radius`, hops `σ^k x ~ σ^k y` for `|k| ≤ radius`.
pub fn certificate_relation(
    family: &WordFamily,
    radius: usize,
    hop_bound: usize,
) -> Result<QuotientRelation> {
    let pair = build_limit_pair(family, 2 * radius)?;
    QuotientRelation::new(QuotientRelationSpec::new(pair, radius, hop_bound)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelBound {
    pub n: usize,
    pub period: u64,
    /// Largest quotient upper bound over one full period.
    pub max_upper: Dyadic,
    /// First shift attaining `max_upper`.
    pub worst_shift: u64,
}

/// Why the images of `w_{2n}^Z` and `w_{2n+1}^Z` stay distinct in the quotient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistinctnessWitness {
    pub n: usize,
    /// Position where `w_{2n}^Z` and `w_{2n+1}^Z` differ.
    #[serde(serialize_with = "crate::bigser::big")]
    pub diff_position: BigUint,
    /// `x_i ≠ x_{i+period}` and `y_i ≠ y_{i+period}` at this `i`, so no shift
    /// of `x` or `y` is `period`-periodic and the pair is not a relation hop.
    pub aperiodic_at: i64,
    pub period: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonexpansivityCertificate {
    pub r: u32,
    pub radius: usize,
    pub hop_bound: usize,
    pub target: Dyadic,
    pub found: bool,
    pub level: Option<usize>,
    pub best_upper: Option<Dyadic>,
    pub levels: Vec<LevelBound>,
    pub distinctness: Option<DistinctnessWitness>,
}

/// Largest quotient upper bound between `σ^j w_{2n}^Z` and `σ^j w_{2n+1}^Z`
/// over every `j` in one period.
pub fn level_bound(family: &WordFamily, rel: &QuotientRelation, n: usize) -> Result<LevelBound> {
    let even = family.materialize(2 * n)?;
    let odd = family.materialize(2 * n + 1)?;
    let period = even.len() as u64;
    let radius = rel.radius();
    let (max_upper, worst_shift) = (0..period)
        .into_par_iter()
        .map(|j| {
            let p = Window::from_periodic(even.letters(), j, radius);
            let q = Window::from_periodic(odd.letters(), j, radius);
            (chain_bound(p.letters(), q.letters(), rel).upper, j)
        })
        .reduce(
            || (Dyadic::ZERO, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok(LevelBound {
        n,
        period,
        max_upper,
        worst_shift,
    })
}

/// Searches `n ≤ n_max` such that every shift pair `(σ^j w_{2n}^Z, σ^j w_{2n+1}^Z)`
/// is within `2^{-r}` in the quotient while the images stay distinct.
pub fn nonexpansivity_certificate(
    family: &WordFamily,
    r: u32,
    n_max: usize,
    radius: usize,
    hop_bound: usize,
) -> Result<NonexpansivityCertificate> {
    if r as usize > radius {
        return Err(Error::Config(format!(
            "resolution 2^-{r} is finer than window radius {radius}"
        )));
    }
    let rel = certificate_relation(family, radius, hop_bound)?;
    nonexpansivity_with(family, &rel, r, n_max)
}

/// [`nonexpansivity_certificate`] with a prebuilt relation.
pub fn nonexpansivity_with(
    family: &WordFamily,
    rel: &QuotientRelation,
    r: u32,
    n_max: usize,
) -> Result<NonexpansivityCertificate> {
    let target = Dyadic::pow2_neg(r);
    let mut cert = NonexpansivityCertificate {
        r,
        radius: rel.radius(),
        hop_bound: rel.spec().hop_bound,
        target,
        found: false,
        level: None,
        best_upper: None,
        levels: Vec::new(),
        distinctness: None,
    };
    for n in 1..=n_max {
        let bound = level_bound(family, rel, n)?;
        let upper = bound.max_upper;
        cert.levels.push(bound);
        cert.best_upper = Some(cert.best_upper.map_or(upper, |b| b.min(upper)));
        if upper <= target {
            cert.distinctness = Some(distinctness_witness(family, n)?);
            cert.found = true;
            cert.level = Some(n);
            break;
        }
    }
    Ok(cert)
}

/// Exhibits `i` with `x_i ≠ x_{i+L}` and `y_i ≠ y_{i+L}` for `L = |w_{2n}|`,
/// reading the limit points lazily.
pub fn distinctness_witness(family: &WordFamily, n: usize) -> Result<DistinctnessWitness> {
    let period = family
        .length_u64(2 * n)?
        .ok_or_else(|| Error::Config(format!("|w_{}| exceeds u64", 2 * n)))?;
    let diff_position = family.length(2 * n - 2)?.clone();
    let search = 4 * period.max(8) as i64;
    for i in 0..search {
        let here = BigInt::from(i);
        let there = BigInt::from(i + period as i64);
        let x_moves = limit_letter(family, 0, &here)? != limit_letter(family, 0, &there)?;
        let y_moves = limit_letter(family, 1, &here)? != limit_letter(family, 1, &there)?;
        if x_moves && y_moves {
            return Ok(DistinctnessWitness {
                n,
                diff_position,
                aperiodic_at: i,
                period,
            });
        }
    }
    Err(Error::NotFound(format!(
        "no aperiodicity witness for period {period} within {search} positions"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeastPeriod {
    pub n: usize,
    pub least_period: u64,
}

/// `σ^m` moves `w_{2n}^Z`: `w_{2n}[position] ≠ w_{2n}[(position + m) mod |w_{2n}|]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaithfulnessWitness {
    pub m: u64,
    pub n: usize,
    pub position: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeastPeriodCertificate {
    pub n_max: usize,
    pub levels: Vec<LeastPeriod>,
    pub m_max: u64,
    pub witnesses: Vec<FaithfulnessWitness>,
}

/// Checks that each `w_{2n}`, `1 ≤ n ≤ n_max`, is primitive (so `w_{2n}^Z`
/// has least period `|w_{2n}|`), then for every `1 ≤ m ≤ |w_{2·n_max}|`
/// finds the least level whose period does not divide `m` and a position
/// that `σ^m` changes.
pub fn least_period_certificate(family: &WordFamily, n_max: usize) -> Result<LeastPeriodCertificate> {
    let mut words: Vec<(usize, Vec<Letter>)> = Vec::new();
    let mut levels = Vec::new();
    for n in 1..=n_max {
        let w = family.materialize(2 * n)?;
        let root = primitive_root(w.letters())?;
        if root.len() != w.len() {
            return Err(Error::PostCondition(format!(
                "w_{} is a proper power of a word of length {}",
                2 * n,
                root.len()
            )));
        }
        levels.push(LeastPeriod {
            n,
            least_period: w.len() as u64,
        });
        words.push((n, w.into_letters()));
    }
    let m_max = levels.last().map_or(0, |l| l.least_period);
    let witnesses = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            words
                .iter()
                .find_map(|(n, w)| {
                    let len = w.len() as u64;
                    let shift = (m % len) as usize;
                    if shift == 0 {
                        return None;
                    }
                    (0..w.len())
                        .find(|&i| w[i] != w[(i + shift) % w.len()])
                        .map(|i| FaithfulnessWitness {
                            m,
                            n: *n,
                            position: i as u64,
                        })
                })
                .ok_or_else(|| {
                    Error::NotFound(format!("no level up to {n_max} is moved by shift {m}"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LeastPeriodCertificate {
        n_max,
        levels,
        m_max,
        witnesses,
    })
}

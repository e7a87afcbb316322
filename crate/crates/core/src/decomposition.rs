//! Token decompositions `w_{2n} = u_1 u_2 ⋯ u_h` over `{w_0, …, w_{2k}}`.
//!
//! Every positioned subword `w_m` with `m > 2k` is replaced by its recurrence
//! factors, recursively, until only indices `≤ 2k` remain. The single
//! letters `w_0`, `w_1` are atoms and are never rewritten. The same rule
//! applies whether a word occurs on its own or nested inside another.

use std::collections::VecDeque;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{Factor, WordFamily, WordIndex};

/// Default token cap for a single stream.
pub const DEFAULT_TOKEN_CAP: u64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Token {
    pub index: WordIndex,
    #[serde(serialize_with = "crate::bigser::big")]
    pub start: BigUint,
    /// 1-based position `t` in `u_1 … u_h`.
    pub ordinal: u64,
}

#[derive(Clone, Debug)]
struct Frame {
    word: usize,
    seg: usize,
    rep: usize,
}

/// Left-to-right stream of the tokens of `w_{2n}` with respect to `k`.
#[derive(Clone, Debug)]
pub struct TokenStream<'a> {
    family: &'a WordFamily,
    max_token: usize,
    stack: Vec<Frame>,
    pending: Option<usize>,
    offset: BigUint,
    ordinal: u64,
    emitted: u64,
    cap: u64,
    done: bool,
}

fn is_token(word: usize, max_token: usize) -> bool {
    word <= max_token || word < 2
}

fn check_levels(family: &WordFamily, n: usize, k: usize) -> Result<()> {
    if 2 * n > family.max_index() || 2 * k > family.max_index() {
        return Err(Error::IndexOutOfRange {
            index: 2 * n.max(k),
            max_level: family.max_level(),
        });
    }
    Ok(())
}

/// Streams the decomposition of `w_{2n}` into tokens of index at most `2k`.
pub fn decompose_tokens(family: &WordFamily, n: usize, k: usize) -> Result<TokenStream<'_>> {
    TokenStream::new(family, n, k, DEFAULT_TOKEN_CAP)
}

impl<'a> TokenStream<'a> {
    pub fn new(family: &'a WordFamily, n: usize, k: usize, cap: u64) -> Result<Self> {
        check_levels(family, n, k)?;
        Ok(TokenStream {
            family,
            max_token: 2 * k,
            stack: Vec::new(),
            pending: Some(2 * n),
            offset: BigUint::zero(),
            ordinal: 0,
            emitted: 0,
            cap,
            done: false,
        })
    }

    /// Restarts a stream at the token beginning at `offset`, e.g. the resume
    /// offset reported by a [`Error::PartialStream`].
    pub fn resume(
        family: &'a WordFamily,
        n: usize,
        k: usize,
        offset: &BigUint,
        cap: u64,
    ) -> Result<Self> {
        check_levels(family, n, k)?;
        let max_token = 2 * k;
        let counts = token_counts(family, n, k)?;
        let total = family.length(2 * n)?;
        if offset >= total {
            return Err(Error::PositionOutOfBounds {
                index: 2 * n,
                position: offset.clone(),
                length: total.clone(),
            });
        }
        let mut stack = Vec::new();
        let mut word = 2 * n;
        let mut local = offset.clone();
        let mut before = BigUint::zero();
        while !is_token(word, max_token) {
            let segments = family.segments(word)?;
            let idx = segments.partition_point(|s| s.start <= local) - 1;
            for s in &segments[..idx] {
                before += factor_tokens(&counts, s.factor);
            }
            let seg = &segments[idx];
            local -= &seg.start;
            match seg.factor {
                Factor::Word(j) => {
                    stack.push(Frame {
                        word,
                        seg: idx + 1,
                        rep: 0,
                    });
                    word = j;
                }
                Factor::Power { word: j, exponent } => {
                    let (rep, rest) = local.div_rem(family.length(j)?);
                    let rep = rep.to_usize().expect("repetition index fits");
                    before += &counts[j] * rep;
                    local = rest;
                    stack.push(if rep + 1 < exponent {
                        Frame {
                            word,
                            seg: idx,
                            rep: rep + 1,
                        }
                    } else {
                        Frame {
                            word,
                            seg: idx + 1,
                            rep: 0,
                        }
                    });
                    word = j;
                }
                Factor::Base(_) => unreachable!("base factors only occur in atoms"),
            }
        }
        if !local.is_zero() {
            return Err(Error::Config(format!(
                "offset {offset} is not the start of a token"
            )));
        }
        let ordinal = before
            .to_u64()
            .ok_or_else(|| Error::Config("resume ordinal exceeds u64".into()))?;
        Ok(TokenStream {
            family,
            max_token,
            stack,
            pending: Some(word),
            offset: offset.clone(),
            ordinal,
            emitted: 0,
            cap,
            done: false,
        })
    }

    fn next_word(&mut self) -> Option<usize> {
        if let Some(word) = self.pending.take() {
            return Some(word);
        }
        loop {
            let frame = self.stack.last_mut()?;
            let segments = self
                .family
                .segments(frame.word)
                .expect("frames only hold valid words");
            let Some(seg) = segments.get(frame.seg) else {
                self.stack.pop();
                continue;
            };
            return Some(match seg.factor {
                Factor::Word(k) => {
                    frame.seg += 1;
                    k
                }
                Factor::Power { word, exponent } => {
                    frame.rep += 1;
                    if frame.rep == exponent {
                        frame.rep = 0;
                        frame.seg += 1;
                    }
                    word
                }
                Factor::Base(_) => unreachable!("base factors only occur in atoms"),
            });
        }
    }
}

impl Iterator for TokenStream<'_> {
    type Item = Result<Token>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let Some(word) = self.next_word() else {
                self.done = true;
                return None;
            };
            if !is_token(word, self.max_token) {
                self.stack.push(Frame {
                    word,
                    seg: 0,
                    rep: 0,
                });
                continue;
            }
            if self.emitted >= self.cap {
                self.done = true;
                return Some(Err(Error::PartialStream {
                    emitted: self.emitted,
                    cap: self.cap,
                    resume_offset: self.offset.clone(),
                }));
            }
            let len = self.family.length(word).expect("valid word");
            let start = self.offset.clone();
            self.offset += len;
            self.ordinal += 1;
            self.emitted += 1;
            return Some(Ok(Token {
                index: WordIndex(word),
                start,
                ordinal: self.ordinal,
            }));
        }
    }
}

fn factor_tokens(counts: &[BigUint], factor: Factor) -> BigUint {
    match factor {
        Factor::Base(_) => BigUint::from(1u8),
        Factor::Word(j) => counts[j].clone(),
        Factor::Power { word, exponent } => &counts[word] * exponent,
    }
}

/// Token counts `h(w_m)` for every `m ≤ 2n`.
fn token_counts(family: &WordFamily, n: usize, k: usize) -> Result<Vec<BigUint>> {
    let mut counts: Vec<BigUint> = Vec::with_capacity(2 * n + 1);
    for m in 0..=2 * n {
        let h = if is_token(m, 2 * k) {
            BigUint::from(1u8)
        } else {
            family
                .segments(m)?
                .iter()
                .map(|s| factor_tokens(&counts, s.factor))
                .sum()
        };
        counts.push(h);
    }
    Ok(counts)
}

/// Number of tokens `h` in the decomposition of `w_{2n}`, without streaming.
pub fn token_count(family: &WordFamily, n: usize, k: usize) -> Result<BigUint> {
    check_levels(family, n, k)?;
    Ok(token_counts(family, n, k)?.pop().unwrap())
}

/// Writes tokens as CSV rows `ordinal,index,start` under a header line.
pub fn write_tokens_csv<W: Write>(
    tokens: impl IntoIterator<Item = Result<Token>>,
    mut out: W,
) -> Result<u64> {
    let io = |e: io::Error| Error::Config(format!("write failed: {e}"));
    writeln!(out, "ordinal,index,start").map_err(io)?;
    let mut rows = 0;
    for token in tokens {
        let token = token?;
        writeln!(out, "{},{},{}", token.ordinal, token.index.0, token.start).map_err(io)?;
        rows += 1;
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub k: usize,
    pub h: u64,
    #[serde(rename = "J", serialize_with = "crate::bigser::big")]
    pub j_bound: BigUint,
    pub first_last_ok: bool,
    /// Largest token distance from a boundary `u_t ≠ u_{t+1}` to the nearest
    /// `u_s = w_{2k}`; `None` when some boundary has no such token at all.
    pub max_gap: Option<u64>,
    pub boundaries: u64,
    pub gap_ok: bool,
}

/// Streams the decomposition once and checks `u_1 = u_h = w_{2k}` and that
/// every boundary pair has a `w_{2k}` token within `J = 2|w_{2k+2}|` steps.
pub fn verify_decomposition_claims(
    family: &WordFamily,
    n: usize,
    k: usize,
) -> Result<DecompositionReport> {
    verify_decomposition_claims_capped(family, n, k, DEFAULT_TOKEN_CAP)
}

pub fn verify_decomposition_claims_capped(
    family: &WordFamily,
    n: usize,
    k: usize,
    cap: u64,
) -> Result<DecompositionReport> {
    let j_bound = family.length(2 * k + 2)? * 2u8;
    let j_steps = j_bound.to_u64().unwrap_or(u64::MAX);
    let target = 2 * k;

    let mut first = None;
    let mut prev: Option<usize> = None;
    let mut h = 0u64;
    let mut last_target: Option<u64> = None;
    // Boundaries still waiting for a target token on their right, with the
    // distance to the nearest one on their left.
    let mut pending: VecDeque<(u64, Option<u64>)> = VecDeque::new();
    let mut max_gap: Option<u64> = Some(0);
    let mut boundaries = 0u64;
    let record = |gap: Option<u64>, max_gap: &mut Option<u64>| {
        *max_gap = match (*max_gap, gap) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    };

    for token in TokenStream::new(family, n, k, cap)? {
        let token = token?;
        let s = token.ordinal;
        let index = token.index.0;
        h = s;
        first.get_or_insert(index);
        if let Some(p) = prev {
            if p != index {
                let t = s - 1;
                boundaries += 1;
                pending.push_back((t, last_target.map(|l| t - l)));
            }
        }
        if index == target {
            while let Some((t, left)) = pending.pop_front() {
                let right = s - t;
                record(Some(left.map_or(right, |l| l.min(right))), &mut max_gap);
            }
            last_target = Some(s);
        }
        prev = Some(index);
    }
    for (_, left) in pending.drain(..) {
        record(left, &mut max_gap);
    }

    let first_last_ok = first == Some(target) && prev == Some(target);
    let gap_ok = max_gap.is_some_and(|g| g <= j_steps);
    Ok(DecompositionReport {
        n,
        k,
        h,
        j_bound,
        first_last_ok,
        max_gap,
        boundaries,
        gap_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indices(family: &WordFamily, n: usize, k: usize) -> Vec<usize> {
        decompose_tokens(family, n, k)
            .unwrap()
            .map(|t| t.unwrap().index.0)
            .collect()
    }

    #[test]
    fn paper_w4_decomposition() {
        let family = WordFamily::new(3);
        let expected = [
            2, 0, 2, 0, 0, 2, 1, 1, 2, 2, 2, 2, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 2,
        ];
        assert_eq!(indices(&family, 2, 1), expected);
    }

    #[test]
    fn coarse_and_fine_decompositions() {
        let family = WordFamily::new(3);
        assert_eq!(indices(&family, 2, 2), [4]);
        assert_eq!(indices(&family, 2, 3), [4]);
        let w4 = family.materialize(4).unwrap();
        let letters: Vec<usize> = w4.letters().iter().map(|l| l.bit() as usize).collect();
        assert_eq!(indices(&family, 2, 0), letters);
    }

    #[test]
    fn starts_are_contiguous() {
        let family = WordFamily::new(4);
        let mut expect = BigUint::zero();
        for (i, token) in decompose_tokens(&family, 4, 1).unwrap().enumerate() {
            let token = token.unwrap();
            assert_eq!(token.ordinal, i as u64 + 1);
            assert_eq!(token.start, expect);
            expect += family.length(token.index).unwrap();
        }
        assert_eq!(&expect, family.length(8).unwrap());
    }

    #[test]
    fn token_count_matches_stream() {
        let family = WordFamily::new(4);
        for (n, k) in [(2, 1), (3, 1), (4, 0), (4, 2), (3, 3)] {
            let streamed = decompose_tokens(&family, n, k).unwrap().count();
            assert_eq!(token_count(&family, n, k).unwrap(), BigUint::from(streamed));
        }
    }

    #[test]
    fn cap_reports_resume_offset_and_resume_continues() {
        let family = WordFamily::new(3);
        let full: Vec<Token> = decompose_tokens(&family, 3, 1)
            .unwrap()
            .map(Result::unwrap)
            .collect();
        let mut capped = TokenStream::new(&family, 3, 1, 10).unwrap();
        let head: Vec<Token> = capped.by_ref().take(10).map(Result::unwrap).collect();
        assert_eq!(head, full[..10]);
        match capped.next() {
            Some(Err(Error::PartialStream {
                emitted,
                resume_offset,
                ..
            })) => {
                assert_eq!(emitted, 10);
                assert_eq!(resume_offset, full[10].start);
                let rest: Vec<Token> =
                    TokenStream::resume(&family, 3, 1, &resume_offset, u64::MAX)
                        .unwrap()
                        .map(Result::unwrap)
                        .collect();
                assert_eq!(rest, full[10..]);
            }
            other => panic!("expected partial stream, got {other:?}"),
        }
        assert!(capped.next().is_none());
    }

    #[test]
    fn resume_rejects_mid_token_offsets() {
        let family = WordFamily::new(3);
        assert!(TokenStream::resume(&family, 2, 1, &BigUint::from(3u8), 100).is_err());
    }

    #[test]
    fn claims_on_w4() {
        let family = WordFamily::new(3);
        let report = verify_decomposition_claims(&family, 2, 1).unwrap();
        assert_eq!(report.h, 27);
        assert_eq!(report.j_bound, BigUint::from(150u8));
        assert!(report.first_last_ok);
        assert!(report.gap_ok);
    }

    #[test]
    fn single_token_when_n_equals_k() {
        let family = WordFamily::new(4);
        for k in 1..=3 {
            let report = verify_decomposition_claims(&family, k, k).unwrap();
            assert_eq!(report.h, 1);
            assert!(report.first_last_ok && report.gap_ok);
            assert_eq!(report.max_gap, Some(0));
        }
    }

    #[test]
    fn csv_rows() {
        let family = WordFamily::new(3);
        let mut buf = Vec::new();
        let rows = write_tokens_csv(decompose_tokens(&family, 2, 1).unwrap(), &mut buf).unwrap();
        assert_eq!(rows, 27);
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("ordinal,index,start"));
        assert_eq!(lines.next(), Some("1,2,0"));
        assert_eq!(lines.next(), Some("2,0,7"));
        assert_eq!(text.lines().last(), Some("27,2,68"));
    }
}

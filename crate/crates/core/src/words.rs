//! The recursive binary word family.
//!
//! `w_0 = 0`, `w_1 = 1`, and for `n ≥ 1`, `a ∈ {0, 1}`:
//!
//! ```text
//! w_{2n+a} = w_{2n-2} w_a w_{2n-2} (w_0^n w_{2n-2}) (w_1^n w_{2n-2}) … (w_{2n-1}^n w_{2n-2})
//! ```
//!
//! Lengths grow super-exponentially, so every word is stored as a table of
//! symbolic factors with cumulative arbitrary-precision offsets. Letters are
//! resolved by descending through the tables; nothing is expanded unless
//! [`WordFamily::materialize`] is asked to.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default materialization cap in letters. `w_12` and `w_13` fit, `w_14` does not.
pub const DEFAULT_MATERIALIZE_CAP: u64 = 100_000_000;

/// A symbol of the binary alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[repr(u8)]
pub enum Letter {
    Zero = 0,
    One = 1,
}

impl Letter {
    pub fn from_bit(bit: u8) -> Option<Letter> {
        match bit {
            0 => Some(Letter::Zero),
            1 => Some(Letter::One),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::Zero => '0',
            Letter::One => '1',
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Index `n` of the word `w_n`; `level = n / 2`, `parity = n % 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WordIndex(pub usize);

impl WordIndex {
    pub fn new(level: usize, parity: u8) -> WordIndex {
        WordIndex(2 * level + usize::from(parity & 1))
    }

    pub fn level(self) -> usize {
        self.0 / 2
    }

    pub fn parity(self) -> u8 {
        (self.0 % 2) as u8
    }
}

impl From<usize> for WordIndex {
    fn from(n: usize) -> Self {
        WordIndex(n)
    }
}

impl fmt::Display for WordIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w_{}", self.0)
    }
}

/// A fully expanded word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExplicitWord {
    letters: Vec<Letter>,
}

impl ExplicitWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        ExplicitWord { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }
}

impl From<&[Letter]> for ExplicitWord {
    fn from(letters: &[Letter]) -> Self {
        ExplicitWord::new(letters.to_vec())
    }
}

impl fmt::Display for ExplicitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters.iter().map(|l| l.as_char()).collect();
        f.write_str(&s)
    }
}

impl FromStr for ExplicitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Letter::Zero),
                '1' => Ok(Letter::One),
                other => Err(Error::Config(format!("not a binary letter: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ExplicitWord::new)
    }
}

/// One symbolic factor of a word's defining concatenation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Factor {
    Base(Letter),
    Word(usize),
    Power { word: usize, exponent: usize },
}

/// A factor together with its absolute offset inside the enclosing word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub factor: Factor,
    pub start: BigUint,
    pub len: BigUint,
}

#[derive(Clone, Debug)]
struct WordTable {
    length: BigUint,
    segments: Vec<Segment>,
    // Machine-word mirror of the offsets, present when the whole word fits in u64.
    small: Option<SmallTable>,
}

#[derive(Clone, Debug)]
struct SmallTable {
    length: u64,
    starts: Vec<u64>,
}

/// The family `w_0, …, w_{2·max_level+1}`. Immutable after construction.
#[derive(Clone, Debug)]
pub struct WordFamily {
    max_level: usize,
    materialize_cap: u64,
    tables: Vec<WordTable>,
}

/// The ordered factor list of `w_{2n+a}` for `n ≥ 1`.
pub fn recurrence_factors(level: usize, parity: u8) -> Vec<Factor> {
    assert!(level >= 1, "the recurrence starts at level 1");
    let spacer = Factor::Word(2 * level - 2);
    let mut factors = Vec::with_capacity(4 * level + 3);
    factors.push(spacer);
    factors.push(Factor::Word(usize::from(parity)));
    factors.push(spacer);
    for k in 0..2 * level {
        factors.push(Factor::Power {
            word: k,
            exponent: level,
        });
        factors.push(spacer);
    }
    factors
}

impl WordFamily {
    pub fn new(max_level: usize) -> Self {
        let mut tables: Vec<WordTable> = Vec::with_capacity(2 * max_level + 2);
        for n in 0..2 * max_level + 2 {
            let index = WordIndex(n);
            let factors = if n < 2 {
                vec![Factor::Base(Letter::from_bit(n as u8).unwrap())]
            } else {
                recurrence_factors(index.level(), index.parity())
            };
            let mut start = BigUint::zero();
            let mut segments = Vec::with_capacity(factors.len());
            for factor in factors {
                let len = match factor {
                    Factor::Base(_) => BigUint::from(1u8),
                    Factor::Word(k) => tables[k].length.clone(),
                    Factor::Power { word, exponent } => &tables[word].length * exponent,
                };
                let next = &start + &len;
                segments.push(Segment { factor, start, len });
                start = next;
            }
            let length = start;
            let small = length.to_u64().and_then(|length| {
                let starts = segments
                    .iter()
                    .map(|s| s.start.to_u64())
                    .collect::<Option<Vec<_>>>()?;
                Some(SmallTable { length, starts })
            });
            tables.push(WordTable {
                length,
                segments,
                small,
            });
        }
        WordFamily {
            max_level,
            materialize_cap: DEFAULT_MATERIALIZE_CAP,
            tables,
        }
    }

    pub fn with_materialize_cap(mut self, cap: u64) -> Self {
        self.materialize_cap = cap;
        self
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn max_index(&self) -> usize {
        2 * self.max_level + 1
    }

    pub fn materialize_cap(&self) -> u64 {
        self.materialize_cap
    }

    fn table(&self, n: usize) -> Result<&WordTable> {
        self.tables.get(n).ok_or(Error::IndexOutOfRange {
            index: n,
            max_level: self.max_level,
        })
    }

    /// `|w_n|`.
    pub fn length(&self, n: impl Into<WordIndex>) -> Result<&BigUint> {
        Ok(&self.table(n.into().0)?.length)
    }

    /// `|w_n|` when it fits a machine word.
    pub fn length_u64(&self, n: impl Into<WordIndex>) -> Result<Option<u64>> {
        Ok(self.table(n.into().0)?.small.as_ref().map(|s| s.length))
    }

    /// `|w_n|` as `usize`, or the materialization-cap error when `w_n` is too long to hold.
    pub fn materializable_length(&self, n: impl Into<WordIndex>) -> Result<usize> {
        let n = n.into().0;
        let table = self.table(n)?;
        match table.small.as_ref() {
            Some(s) if s.length <= self.materialize_cap => Ok(s.length as usize),
            _ => Err(Error::MaterializationCap {
                index: n,
                required: table.length.clone(),
                cap: self.materialize_cap,
            }),
        }
    }

    pub fn segments(&self, n: impl Into<WordIndex>) -> Result<&[Segment]> {
        Ok(&self.table(n.into().0)?.segments)
    }

    /// The letter `w_n[i]`, resolved without materializing `w_n`.
    pub fn letter_at(&self, n: impl Into<WordIndex>, i: &BigUint) -> Result<Letter> {
        let n = n.into().0;
        let table = self.table(n)?;
        if *i >= table.length {
            return Err(Error::PositionOutOfBounds {
                index: n,
                position: i.clone(),
                length: table.length.clone(),
            });
        }
        let mut word = n;
        let mut offset = i.clone();
        loop {
            let table = &self.tables[word];
            if let Some(small) = &table.small {
                // Everything below a u64-sized word is u64-sized too.
                let offset = offset.to_u64().expect("offset below a u64 length");
                return Ok(self.descend_small(word, offset, small));
            }
            let seg = locate(&table.segments, &offset);
            let segment = &table.segments[seg];
            offset -= &segment.start;
            match segment.factor {
                Factor::Base(letter) => return Ok(letter),
                Factor::Word(k) => word = k,
                Factor::Power { word: k, .. } => {
                    offset %= &self.tables[k].length;
                    word = k;
                }
            }
        }
    }

    /// Same as [`letter_at`](Self::letter_at) for machine-sized positions.
    pub fn letter_at_u64(&self, n: impl Into<WordIndex>, i: u64) -> Result<Letter> {
        let n = n.into().0;
        let table = self.table(n)?;
        match &table.small {
            Some(small) if i < small.length => Ok(self.descend_small(n, i, small)),
            Some(_) => Err(Error::PositionOutOfBounds {
                index: n,
                position: BigUint::from(i),
                length: table.length.clone(),
            }),
            None => self.letter_at(n, &BigUint::from(i)),
        }
    }

    fn descend_small<'a>(&'a self, mut word: usize, mut offset: u64, mut small: &'a SmallTable) -> Letter {
        loop {
            let table = &self.tables[word];
            let seg = small.starts.partition_point(|&s| s <= offset) - 1;
            offset -= small.starts[seg];
            match table.segments[seg].factor {
                Factor::Base(letter) => return letter,
                Factor::Word(k) => word = k,
                Factor::Power { word: k, .. } => {
                    let len = self.tables[k].small.as_ref().unwrap().length;
                    offset %= len;
                    word = k;
                }
            }
            small = self.tables[word].small.as_ref().unwrap();
        }
    }

    /// Expands `w_n` in full. Refuses when `|w_n|` exceeds the materialization cap.
    pub fn materialize(&self, n: impl Into<WordIndex>) -> Result<ExplicitWord> {
        let n = n.into().0;
        let len = self.materializable_length(n)?;
        let mut out = Vec::with_capacity(len);
        self.write_word(n, &mut out);
        debug_assert_eq!(out.len(), len);
        Ok(ExplicitWord::new(out))
    }

    fn write_word(&self, n: usize, out: &mut Vec<Letter>) {
        for segment in &self.tables[n].segments {
            match segment.factor {
                Factor::Base(letter) => out.push(letter),
                Factor::Word(k) => self.write_word(k, out),
                Factor::Power { word, exponent } => {
                    let from = out.len();
                    self.write_word(word, out);
                    let to = out.len();
                    for _ in 1..exponent {
                        out.extend_from_within(from..to);
                    }
                }
            }
        }
    }

    /// Positions where `w_{2n}` and `w_{2n+1}` differ; always `{|w_{2n-2}|}`.
    ///
    /// Materializable pairs are compared letter by letter. Longer pairs are
    /// compared structurally: aligned identical factors are skipped and only
    /// mismatching factors are descended into.
    pub fn diff_positions(&self, level: usize) -> Result<BTreeSet<BigUint>> {
        if level == 0 {
            return Err(Error::Config("diff_positions needs level >= 1".into()));
        }
        let even = 2 * level;
        let odd = even + 1;
        self.table(odd)?;
        let mut diffs = BTreeSet::new();
        if let (Ok(a), Ok(b)) = (self.materialize(even), self.materialize(odd)) {
            for (i, (x, y)) in a.letters().iter().zip(b.letters()).enumerate() {
                if x != y {
                    diffs.insert(BigUint::from(i));
                }
            }
        } else {
            self.structural_diff(even, odd, &BigUint::zero(), &mut diffs)?;
        }
        let expected = self.tables[even - 2].length.clone();
        if diffs.len() != 1 || !diffs.contains(&expected) {
            return Err(Error::PostCondition(format!(
                "w_{even} and w_{odd} should differ exactly at {expected}, found {} positions",
                diffs.len()
            )));
        }
        Ok(diffs)
    }

    fn structural_diff(
        &self,
        a: usize,
        b: usize,
        base: &BigUint,
        out: &mut BTreeSet<BigUint>,
    ) -> Result<()> {
        if a == b {
            return Ok(());
        }
        let (ta, tb) = (&self.tables[a], &self.tables[b]);
        let aligned = ta.segments.len() == tb.segments.len()
            && ta
                .segments
                .iter()
                .zip(&tb.segments)
                .all(|(x, y)| x.len == y.len);
        if !aligned {
            return Err(Error::PostCondition(format!(
                "w_{a} and w_{b} have unaligned factor tables"
            )));
        }
        for (x, y) in ta.segments.iter().zip(&tb.segments) {
            let start = base + &x.start;
            match (x.factor, y.factor) {
                (f, g) if f == g => {}
                (Factor::Base(p), Factor::Base(q)) => {
                    if p != q {
                        out.insert(start);
                    }
                }
                (Factor::Word(i), Factor::Word(j)) => self.structural_diff(i, j, &start, out)?,
                _ => {
                    return Err(Error::PostCondition(format!(
                        "w_{a} and w_{b} mix incompatible factors"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Index of the segment whose half-open range contains `offset`.
fn locate(segments: &[Segment], offset: &BigUint) -> usize {
    segments.partition_point(|s| &s.start <= offset) - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concat(n: usize) -> String {
        // Direct string recurrence, independent of the factor tables.
        let mut words: Vec<String> = vec!["0".into(), "1".into()];
        for m in 2..=n {
            let level = m / 2;
            let spacer = words[2 * level - 2].clone();
            let mut w = String::new();
            w += &spacer;
            w += &words[m % 2];
            w += &spacer;
            for k in 0..2 * level {
                w += &words[k].repeat(level);
                w += &spacer;
            }
            words.push(w);
        }
        words[n].clone()
    }

    #[test]
    fn small_words() {
        let family = WordFamily::new(3);
        assert_eq!(family.materialize(0).unwrap().to_string(), "0");
        assert_eq!(family.materialize(2).unwrap().to_string(), "0000010");
        assert_eq!(family.materialize(3).unwrap().to_string(), "0100010");
        assert_eq!(family.materialize(6).unwrap().to_string(), concat(6));
    }

    #[test]
    fn lengths() {
        let family = WordFamily::new(3);
        let lens: Vec<u64> = (0..8)
            .map(|n| family.length_u64(n).unwrap().unwrap())
            .collect();
        assert_eq!(lens, [1, 1, 7, 7, 75, 75, 1099, 1099]);
        for n in 0..8 {
            assert_eq!(concat(n).len() as u64, lens[n]);
        }
    }

    #[test]
    fn letter_examples() {
        let family = WordFamily::new(3);
        assert_eq!(family.letter_at_u64(3, 1).unwrap(), Letter::One);
        assert_eq!(family.letter_at_u64(5, 7).unwrap(), Letter::One);
        let w2 = family.materialize(2).unwrap();
        for i in 0..7 {
            assert_eq!(family.letter_at_u64(4, i).unwrap(), w2.letters()[i as usize]);
        }
    }

    #[test]
    fn out_of_range_errors() {
        let family = WordFamily::new(2);
        assert!(matches!(
            family.length(6),
            Err(Error::IndexOutOfRange { index: 6, .. })
        ));
        assert!(matches!(
            family.letter_at_u64(3, 7),
            Err(Error::PositionOutOfBounds { .. })
        ));
        assert!(matches!(
            family.letter_at(4, &BigUint::from(75u8)),
            Err(Error::PositionOutOfBounds { .. })
        ));
    }

    #[test]
    fn materialize_cap_refuses() {
        let family = WordFamily::new(3).with_materialize_cap(100);
        match family.materialize(6) {
            Err(Error::MaterializationCap { required, cap, .. }) => {
                assert_eq!(required, BigUint::from(1099u32));
                assert_eq!(cap, 100);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
        assert!(family.materialize(5).is_ok());
    }

    #[test]
    fn big_and_small_descents_agree() {
        let family = WordFamily::new(4);
        let w = family.materialize(9).unwrap();
        for i in (0..w.len()).step_by(37) {
            let big = BigUint::from(i);
            assert_eq!(family.letter_at(9, &big).unwrap(), w.letters()[i]);
        }
    }

    #[test]
    fn diff_examples() {
        let family = WordFamily::new(4);
        let one = |v: u32| BTreeSet::from([BigUint::from(v)]);
        assert_eq!(family.diff_positions(1).unwrap(), one(1));
        assert_eq!(family.diff_positions(2).unwrap(), one(7));
        assert_eq!(family.diff_positions(3).unwrap(), one(75));
        assert!(family.diff_positions(0).is_err());
    }

    #[test]
    fn structural_diff_matches_scan() {
        let family = WordFamily::new(4).with_materialize_cap(10);
        let one = |v: u32| BTreeSet::from([BigUint::from(v)]);
        assert_eq!(family.diff_positions(3).unwrap(), one(75));
        assert_eq!(family.diff_positions(4).unwrap(), one(1099));
    }

    #[test]
    fn segment_offsets_are_increasing() {
        let family = WordFamily::new(6);
        for n in 2..=13 {
            let segs = family.segments(n).unwrap();
            assert_eq!(segs.len(), 4 * (n / 2) + 3);
            for pair in segs.windows(2) {
                assert!(pair[0].start < pair[1].start);
                assert_eq!(&pair[0].start + &pair[0].len, pair[1].start);
            }
            let last = segs.last().unwrap();
            assert_eq!(&last.start + &last.len, *family.length(n).unwrap());
        }
    }

    #[test]
    fn parse_and_display() {
        let w: ExplicitWord = "0110".parse().unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.to_string(), "0110");
        assert!("012".parse::<ExplicitWord>().is_err());
    }
}

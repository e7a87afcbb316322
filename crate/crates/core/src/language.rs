//! Periods, primitivity, occurrence in periodic points and the coverage lemma.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{ExplicitWord, Letter, WordFamily, WordIndex};

/// Default cap on letters scanned by a single occurrence search.
pub const DEFAULT_SCAN_CAP: u64 = 100_000_000;

/// Knuth–Morris–Pratt failure table: `fail[i]` is the length of the longest
/// proper border of `pattern[..=i]`.
pub fn prefix_function<T: Eq>(pattern: &[T]) -> Vec<usize> {
    let mut fail = vec![0; pattern.len()];
    let mut k = 0;
    for i in 1..pattern.len() {
        while k > 0 && pattern[i] != pattern[k] {
            k = fail[k - 1];
        }
        if pattern[i] == pattern[k] {
            k += 1;
        }
        fail[i] = k;
    }
    fail
}

/// Linear-time substring matcher.
#[derive(Clone, Debug)]
pub struct Matcher<'p, T> {
    pattern: &'p [T],
    fail: Vec<usize>,
}

impl<'p, T: Eq> Matcher<'p, T> {
    pub fn new(pattern: &'p [T]) -> Self {
        Matcher {
            pattern,
            fail: prefix_function(pattern),
        }
    }

    /// Calls `hit` with the start of every occurrence, left to right. Stops
    /// early when `hit` returns `false`.
    fn scan(&self, text: &[T], mut hit: impl FnMut(usize) -> bool) {
        let m = self.pattern.len();
        if m == 0 {
            for i in 0..=text.len() {
                if !hit(i) {
                    return;
                }
            }
            return;
        }
        let mut q = 0;
        for (i, c) in text.iter().enumerate() {
            while q > 0 && *c != self.pattern[q] {
                q = self.fail[q - 1];
            }
            if *c == self.pattern[q] {
                q += 1;
            }
            if q == m {
                if !hit(i + 1 - m) {
                    return;
                }
                q = self.fail[q - 1];
            }
        }
    }

    pub fn find_first(&self, text: &[T]) -> Option<usize> {
        let mut found = None;
        self.scan(text, |i| {
            found = Some(i);
            false
        });
        found
    }

    pub fn find_all(&self, text: &[T]) -> Vec<usize> {
        let mut all = Vec::new();
        self.scan(text, |i| {
            all.push(i);
            true
        });
        all
    }
}

/// Smallest `p ≥ 1` with `v[i] = v[i+p]` for all valid `i`.
pub fn min_period(v: &[Letter]) -> Result<usize> {
    if v.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(v.len() - prefix_function(v)[v.len() - 1])
}

/// Shortest `r` with `u = r^e`.
pub fn primitive_root(u: &[Letter]) -> Result<ExplicitWord> {
    let p = min_period(u)?;
    let len = if u.len() % p == 0 { p } else { u.len() };
    Ok(ExplicitWord::from(&u[..len]))
}

pub fn is_primitive(u: &[Letter]) -> Result<bool> {
    Ok(primitive_root(u)?.len() == u.len())
}

/// The periodic point `base^Z` viewed from offset `phase`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicPointSpec {
    pub base: WordIndex,
    #[serde(serialize_with = "crate::bigser::big")]
    pub phase: BigUint,
}

impl PeriodicPointSpec {
    /// Reduces `phase` modulo `|w_base|`.
    pub fn new(family: &WordFamily, base: impl Into<WordIndex>, phase: &BigInt) -> Result<Self> {
        let base = base.into();
        let len = BigInt::from_biguint(Sign::Plus, family.length(base)?.clone());
        let reduced = ((phase % &len) + &len) % &len;
        Ok(PeriodicPointSpec {
            base,
            phase: reduced.to_biguint().expect("reduced phase is non-negative"),
        })
    }

    /// Letter of the point at integer position `i`.
    pub fn letter(&self, family: &WordFamily, i: &BigInt) -> Result<Letter> {
        let len = BigInt::from_biguint(Sign::Plus, family.length(self.base)?.clone());
        let pos = ((BigInt::from_biguint(Sign::Plus, self.phase.clone()) + i) % &len + &len) % &len;
        family.letter_at(self.base, &pos.to_biguint().unwrap())
    }
}

/// Whether `u` is a subword of `base^Z`. The phase does not matter for
/// occurrence; it is carried only so the same spec can address letters.
pub fn occurs_in_periodic(
    family: &WordFamily,
    u: &[Letter],
    spec: &PeriodicPointSpec,
    scan_cap: u64,
) -> Result<bool> {
    let base = family.materialize(spec.base)?;
    let period = base.len();
    let copies = u.len().div_ceil(period) + 1;
    let required = copies as u64 * period as u64;
    if required > scan_cap {
        return Err(Error::ScanCap {
            required: BigUint::from(required),
            cap: scan_cap,
        });
    }
    let host = base.letters().repeat(copies);
    Ok(Matcher::new(u).find_first(&host).is_some())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    Member { level: usize, offset: usize },
    UnknownAtCap { levels_checked: usize },
}

/// Semi-decides `u ∈ L(X)` by searching `w_{2m}` for `m ≤ level_cap`.
/// A miss is "unknown", never "absent".
pub fn language_membership(
    family: &WordFamily,
    u: &[Letter],
    level_cap: usize,
) -> Result<Membership> {
    let matcher = Matcher::new(u);
    let mut checked = 0;
    for m in 0..=level_cap.min(family.max_level()) {
        let Ok(host) = family.materialize(2 * m) else {
            break;
        };
        checked += 1;
        if let Some(offset) = matcher.find_first(host.letters()) {
            return Ok(Membership::Member { level: m, offset });
        }
    }
    Ok(Membership::UnknownAtCap {
        levels_checked: checked,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub k: usize,
    pub n: usize,
    pub offset: usize,
    pub min_period: usize,
    #[serde(serialize_with = "ser_word")]
    pub word: ExplicitWord,
}

fn ser_word<S: serde::Serializer>(w: &ExplicitWord, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(w)
}

/// First subword `v` of `w_{2n}` with `|v| = 2|w_{2k}|` and
/// `min_period(v) > |w_{2k}|`, i.e. not a factor of any power of a word no
/// longer than `w_{2k}`.
pub fn find_nonpower_witness(family: &WordFamily, k: usize, n: usize) -> Result<Witness> {
    let unit = family.materializable_length(2 * k)?;
    let host = family.materialize(2 * n)?;
    let width = 2 * unit;
    if host.len() >= width {
        for (offset, v) in host.letters().windows(width).enumerate() {
            let p = min_period(v)?;
            if p > unit {
                return Ok(Witness {
                    k,
                    n,
                    offset,
                    min_period: p,
                    word: ExplicitWord::from(v),
                });
            }
        }
    }
    Err(Error::NotFound(format!(
        "no subword of w_{} of length {width} has least period above {unit}",
        2 * n
    )))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub k: usize,
    pub n: usize,
    pub window_length: u64,
    pub windows_scanned: u64,
    pub windows_with_witness_center: u64,
    pub failures: u64,
    pub first_failure: Option<u64>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Window length `2|w_{2k+2}||w_{2k}| + 2J` with `J = 2|w_{2k+2}|`.
pub fn coverage_window_length(family: &WordFamily, k: usize) -> Result<BigUint> {
    let upper = family.length(2 * k + 2)?;
    let unit = family.length(2 * k)?;
    Ok(upper * unit * 2u8 + upper * 4u8)
}

/// Slides the coverage window across `w_{2n}`. Every window whose central
/// subword of length `2|w_{2k}|` has least period above `|w_{2k}|` must
/// contain `w_{2k}`; violations are counted.
pub fn verify_coverage_lemma(family: &WordFamily, k: usize, n: usize) -> Result<CoverageReport> {
    let window_big = coverage_window_length(family, k)?;
    let window_length = window_big.to_u64().unwrap_or(u64::MAX);
    let host = family.materialize(2 * n)?;
    let target = family.materialize(2 * k)?;
    let unit = target.len();
    let center_len = 2 * unit;

    let mut report = CoverageReport {
        k,
        n,
        window_length,
        windows_scanned: 0,
        windows_with_witness_center: 0,
        failures: 0,
        first_failure: None,
    };
    if window_big > BigUint::from(host.len()) {
        return Ok(report);
    }
    let window = window_length as usize;
    let letters = host.letters();
    let occurrences = Matcher::new(target.letters()).find_all(letters);
    let center_at = window / 2 - center_len / 2;
    let last_start = letters.len() - window;

    let contains_target = |s: usize| {
        let i = occurrences.partition_point(|&o| o < s);
        i < occurrences.len() && occurrences[i] + unit <= s + window
    };

    const CHUNK: usize = 4096;
    let (witnessed, failures, first) = (0..=last_start / CHUNK)
        .into_par_iter()
        .map(|c| c * CHUNK)
        .map(|chunk| {
            let mut witnessed = 0u64;
            let mut failures = 0u64;
            let mut first: Option<u64> = None;
            for s in chunk..(chunk + CHUNK).min(last_start + 1) {
                let center = &letters[s + center_at..s + center_at + center_len];
                if min_period(center).expect("non-empty center") > unit {
                    witnessed += 1;
                    if !contains_target(s) {
                        failures += 1;
                        first.get_or_insert(s as u64);
                    }
                }
            }
            (witnessed, failures, first)
        })
        .reduce(
            || (0, 0, None),
            |a, b| {
                let first = match (a.2, b.2) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                (a.0 + b.0, a.1 + b.1, first)
            },
        );
    report.windows_scanned = last_start as u64 + 1;
    report.windows_with_witness_center = witnessed;
    report.failures = failures;
    report.first_failure = first;
    Ok(report)
}

/// `true` when `u_{i+p} = u_i` wherever both sides exist.
pub fn has_period(v: &[Letter], p: usize) -> bool {
    p >= 1 && v.iter().zip(v.iter().skip(p)).all(|(a, b)| a == b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn w(s: &str) -> Vec<Letter> {
        s.parse::<ExplicitWord>().unwrap().into_letters()
    }

    fn brute_min_period(v: &[Letter]) -> usize {
        (1..=v.len()).find(|&p| has_period(v, p)).unwrap()
    }

    #[test]
    fn min_period_examples() {
        assert_eq!(min_period(&w("000")).unwrap(), 1);
        assert_eq!(min_period(&w("0000010")).unwrap(), 6);
        assert_eq!(min_period(&w("0100010")).unwrap(), 4);
        assert!(matches!(min_period(&[]), Err(Error::EmptyWord)));
        for s in ["0", "01", "0110", "010010", "1101101"] {
            assert_eq!(min_period(&w(s)).unwrap(), brute_min_period(&w(s)), "{s}");
        }
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(primitive_root(&w("0101")).unwrap().to_string(), "01");
        assert_eq!(primitive_root(&w("0000010")).unwrap().to_string(), "0000010");
        assert_eq!(primitive_root(&w("111")).unwrap().to_string(), "1");
        let family = WordFamily::new(2);
        let w4 = family.materialize(4).unwrap();
        assert_eq!(primitive_root(w4.letters()).unwrap(), w4);
    }

    #[test]
    fn matcher_finds_all() {
        let text = w("0010010010");
        let pat = w("010");
        assert_eq!(Matcher::new(&pat).find_all(&text), [1, 4, 7]);
        assert_eq!(Matcher::new(&w("11")).find_first(&text), None);
    }

    #[test]
    fn periodic_occurrence_examples() {
        let family = WordFamily::new(3);
        let zero = BigInt::zero();
        let base2 = PeriodicPointSpec::new(&family, 2, &zero).unwrap();
        assert!(occurs_in_periodic(&family, &w("01"), &base2, DEFAULT_SCAN_CAP).unwrap());
        assert!(!occurs_in_periodic(&family, &w("11"), &base2, DEFAULT_SCAN_CAP).unwrap());
        // wrap-around: "100" straddles the end of one period
        assert!(occurs_in_periodic(&family, &w("1000"), &base2, DEFAULT_SCAN_CAP).unwrap());
        let base4 = PeriodicPointSpec::new(&family, 4, &BigInt::from(-3)).unwrap();
        assert_eq!(base4.phase, BigUint::from(72u8));
        let w2 = family.materialize(2).unwrap();
        assert!(occurs_in_periodic(&family, w2.letters(), &base4, DEFAULT_SCAN_CAP).unwrap());
        assert!(matches!(
            occurs_in_periodic(&family, &w("0"), &base4, 10),
            Err(Error::ScanCap { .. })
        ));
    }

    #[test]
    fn periodic_letters() {
        let family = WordFamily::new(2);
        let spec = PeriodicPointSpec::new(&family, 3, &BigInt::from(1)).unwrap();
        // w_3 = 0100010 shifted by one: position 0 reads w_3[1] = 1
        assert_eq!(spec.letter(&family, &BigInt::zero()).unwrap(), Letter::One);
        assert_eq!(spec.letter(&family, &BigInt::from(-1)).unwrap(), Letter::Zero);
        assert_eq!(spec.letter(&family, &BigInt::from(7)).unwrap(), Letter::One);
    }

    #[test]
    fn witness_examples() {
        let family = WordFamily::new(3);
        let wit = find_nonpower_witness(&family, 0, 1).unwrap();
        assert_eq!(wit.word.to_string(), "01");
        assert_eq!(wit.offset, 4);
        assert!(matches!(
            find_nonpower_witness(&family, 1, 1),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn membership_is_semi_decided() {
        let family = WordFamily::new(3);
        assert!(matches!(
            language_membership(&family, &w("0100010"), 3).unwrap(),
            Membership::Member { level: 2, .. }
        ));
        assert_eq!(
            language_membership(&family, &w("11111111"), 3).unwrap(),
            Membership::UnknownAtCap { levels_checked: 4 }
        );
    }

    #[test]
    fn coverage_small_host_scans_nothing() {
        let family = WordFamily::new(3);
        let report = verify_coverage_lemma(&family, 1, 2).unwrap();
        assert_eq!(report.window_length, 1350);
        assert_eq!(report.windows_scanned, 0);
        assert!(report.passed());
    }

    #[test]
    fn coverage_k0() {
        let family = WordFamily::new(3);
        let report = verify_coverage_lemma(&family, 0, 3).unwrap();
        assert_eq!(report.window_length, 42);
        assert_eq!(report.windows_scanned, 1099 - 42 + 1);
        assert!(report.windows_with_witness_center > 0);
        assert_eq!(report.failures, 0);
    }
}

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Signed;
use serde::{Serialize, Serializer};

use super::dyadic::{Dyadic, MAX_EXPONENT};
use crate::error::{Error, Result};
use crate::words::{Letter, WordFamily};

/// Letters of a point of `A^Z` on `[-radius, radius]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    radius: usize,
    letters: Vec<Letter>,
}

impl Window {
    pub fn from_fn(radius: usize, mut letter: impl FnMut(i64) -> Letter) -> Window {
        let r = radius as i64;
        Window {
            radius,
            letters: (-r..=r).map(&mut letter).collect(),
        }
    }

    pub fn from_letters(radius: usize, letters: Vec<Letter>) -> Result<Window> {
        if letters.len() != 2 * radius + 1 {
            return Err(Error::Config(format!(
                "window of radius {radius} needs {} letters, got {}",
                2 * radius + 1,
                letters.len()
            )));
        }
        Ok(Window { radius, letters })
    }

    /// Window of the periodic point `word^Z` shifted left by `shift`.
    pub fn from_periodic(word: &[Letter], shift: u64, radius: usize) -> Window {
        let len = word.len() as i64;
        let base = (shift % word.len() as u64) as i64;
        Window::from_fn(radius, |i| word[(base + i).rem_euclid(len) as usize])
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn get(&self, i: i64) -> Option<Letter> {
        let idx = i + self.radius as i64;
        (0..self.letters.len() as i64)
            .contains(&idx)
            .then(|| self.letters[idx as usize])
    }

    /// The window of `σ^k` of this point, at a smaller radius.
    pub fn shifted(&self, k: i64, radius: usize) -> Result<Window> {
        if k.unsigned_abs() as usize + radius > self.radius {
            return Err(Error::Config(format!(
                "shift {k} at radius {radius} leaves a window of radius {}",
                self.radius
            )));
        }
        let from = (self.radius as i64 + k - radius as i64) as usize;
        Ok(Window {
            radius,
            letters: self.letters[from..from + 2 * radius + 1].to_vec(),
        })
    }

    /// Positions in the window where the two points differ.
    pub fn diff(&self, other: &Window) -> Result<Vec<i64>> {
        if self.radius != other.radius {
            return Err(Error::RadiusMismatch(self.radius, other.radius));
        }
        let r = self.radius as i64;
        Ok(self
            .letters
            .iter()
            .zip(&other.letters)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i as i64 - r)
            .collect())
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let letters: String = self.letters.iter().map(|l| l.as_char()).collect();
        s.collect_str(&letters)
    }
}

/// A certified enclosure `[lower, upper]` of a distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceBound {
    pub lower: Dyadic,
    pub upper: Dyadic,
}

impl DistanceBound {
    pub fn exact(value: Dyadic) -> Self {
        DistanceBound {
            lower: value,
            upper: value,
        }
    }
}

/// Smallest `m` with `a[m] ≠ b[m]` or `a[-m] ≠ b[-m]` for two centered
/// slices of equal odd length.
pub(crate) fn first_difference(a: &[Letter], b: &[Letter]) -> Option<usize> {
    debug_assert_eq!(a.len(), b.len());
    let r = a.len() / 2;
    (0..=r).find(|&m| a[r + m] != b[r + m] || a[r - m] != b[r - m])
}

pub(crate) fn slice_distance(a: &[Letter], b: &[Letter]) -> DistanceBound {
    let radius = a.len() / 2;
    match first_difference(a, b) {
        Some(m) if m as u32 <= MAX_EXPONENT => DistanceBound::exact(Dyadic::pow2_neg(m as u32)),
        _ => DistanceBound {
            lower: Dyadic::ZERO,
            upper: Dyadic::pow2_neg(radius.min(MAX_EXPONENT as usize) as u32),
        },
    }
}

/// `d(p, q) = 2^{-min{|i| : p_i ≠ q_i}}`; without a visible difference the
/// distance is only known to lie in `[0, 2^{-radius}]`.
pub fn cantor_distance(p: &Window, q: &Window) -> Result<DistanceBound> {
    if p.radius != q.radius {
        return Err(Error::RadiusMismatch(p.radius, q.radius));
    }
    Ok(slice_distance(&p.letters, &q.letters))
}

fn check_level(family: &WordFamily, level: usize) -> Result<()> {
    if level == 0 || 2 * level + 1 > family.max_index() {
        return Err(Error::IndexOutOfRange {
            index: 2 * level + 1,
            max_level: family.max_level(),
        });
    }
    Ok(())
}

/// Letter `i` of `σ^{|w_{2n-2}|}(w_{2n+a}^Z)`, via lazy access.
fn shifted_periodic_letter(family: &WordFamily, level: usize, parity: u8, i: &BigInt) -> Result<Letter> {
    let word = 2 * level + usize::from(parity);
    let len = BigInt::from_biguint(Sign::Plus, family.length(word)?.clone());
    let shift = BigInt::from_biguint(Sign::Plus, family.length(2 * level - 2)?.clone());
    let pos = ((shift + i) % &len + &len) % &len;
    family.letter_at(word, &pos.to_biguint().unwrap())
}

/// Window of `σ^{|w_{2n-2}|}(w_{2n+a}^Z)` on `[-radius, radius]`.
pub fn point_window(family: &WordFamily, level: usize, parity: u8, radius: usize) -> Result<Window> {
    check_level(family, level)?;
    let word = 2 * level + usize::from(parity);
    if let (Some(len), Some(shift)) = (
        family.length_u64(word)?,
        family.length_u64(2 * level - 2)?,
    ) {
        let len = len as i128;
        let mut err = None;
        let w = Window::from_fn(radius, |i| {
            let pos = (shift as i128 + i as i128).rem_euclid(len) as u64;
            family.letter_at_u64(word, pos).unwrap_or_else(|e| {
                err = Some(e);
                Letter::Zero
            })
        });
        return err.map_or(Ok(w), Err);
    }
    let r = radius as i64;
    let letters = (-r..=r)
        .map(|i| shifted_periodic_letter(family, level, parity, &BigInt::from(i)))
        .collect::<Result<Vec<_>>>()?;
    Window::from_letters(radius, letters)
}

/// Least `n ≥ 1` with `|w_{2n-2}| ≥ radius`: from that level on the window of
/// radius `radius` around the origin no longer changes.
pub fn stabilization_level(family: &WordFamily, radius: &BigUint) -> Result<usize> {
    (1..=family.max_level())
        .find(|&n| family.length(2 * n - 2).is_ok_and(|l| l >= radius))
        .ok_or_else(|| {
            Error::Config(format!(
                "max level {} too small for radius {radius}",
                family.max_level()
            ))
        })
}

/// Letter at position `i` of the limit point `x` (`parity = 0`) or `y` (`parity = 1`).
pub fn limit_letter(family: &WordFamily, parity: u8, i: &BigInt) -> Result<Letter> {
    let level = stabilization_level(family, &i.abs().to_biguint().unwrap())?;
    check_level(family, level)?;
    shifted_periodic_letter(family, level, parity, i)
}

/// Finite-radius approximations of the two limit points that differ only at the origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitPair {
    pub radius: usize,
    pub x_window: Window,
    pub y_window: Window,
    pub level_used: usize,
    pub stabilized: bool,
}

pub fn build_limit_pair(family: &WordFamily, radius: usize) -> Result<LimitPair> {
    let level = stabilization_level(family, &BigUint::from(radius))?;
    if 2 * (level + 1) + 1 > family.max_index() {
        return Err(Error::Config(format!(
            "radius {radius} stabilizes at level {level}; max level must be at least {}",
            level + 1
        )));
    }
    let x_window = point_window(family, level, 0, radius)?;
    let y_window = point_window(family, level, 1, radius)?;
    let stabilized = x_window == point_window(family, level + 1, 0, radius)?
        && y_window == point_window(family, level + 1, 1, radius)?;
    let diff = x_window.diff(&y_window)?;
    if diff != [0] {
        return Err(Error::PostCondition(format!(
            "limit windows should differ only at the origin, differ at {diff:?}"
        )));
    }
    Ok(LimitPair {
        radius,
        x_window,
        y_window,
        level_used: level,
        stabilized,
    })
}

impl LimitPair {
    /// Letter of `x` (`parity = 0`) or `y` at `i`, if inside the stored radius.
    pub fn letter(&self, parity: u8, i: i64) -> Option<Letter> {
        if parity == 0 {
            self.x_window.get(i)
        } else {
            self.y_window.get(i)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(s: &str) -> Window {
        let letters = s
            .chars()
            .map(|c| Letter::from_bit(c.to_digit(2).unwrap() as u8).unwrap())
            .collect::<Vec<_>>();
        Window::from_letters(s.len() / 2, letters).unwrap()
    }

    #[test]
    fn point_window_examples() {
        let family = WordFamily::new(4);
        assert_eq!(point_window(&family, 2, 0, 1).unwrap(), win("000"));
        assert_eq!(point_window(&family, 2, 1, 1).unwrap(), win("010"));
        for level in 1..=3 {
            for parity in 0..2 {
                let w = point_window(&family, level, parity, 5).unwrap();
                assert_eq!(w.get(0).unwrap().bit(), parity);
            }
        }
    }

    #[test]
    fn stabilizes_once_spacer_covers_radius() {
        let family = WordFamily::new(5);
        for level in 2..=4 {
            for parity in 0..2 {
                assert_eq!(
                    point_window(&family, level, parity, 7).unwrap(),
                    point_window(&family, level + 1, parity, 7).unwrap()
                );
            }
        }
    }

    #[test]
    fn limit_pair_examples() {
        let family = WordFamily::new(5);
        let pair = build_limit_pair(&family, 1).unwrap();
        assert_eq!(pair.x_window, win("000"));
        assert_eq!(pair.y_window, win("010"));
        let pair = build_limit_pair(&family, 7).unwrap();
        assert_eq!(pair.level_used, 2);
        assert!(pair.stabilized);
        let pair = build_limit_pair(&family, 100).unwrap();
        assert_eq!(pair.level_used, 4);
        assert_eq!(pair.x_window.diff(&pair.y_window).unwrap(), [0]);
        assert!(build_limit_pair(&WordFamily::new(2), 100).is_err());
    }

    #[test]
    fn limit_letters_match_windows() {
        let family = WordFamily::new(6);
        let pair = build_limit_pair(&family, 200).unwrap();
        for i in -200i64..=200 {
            for parity in 0..2 {
                assert_eq!(
                    limit_letter(&family, parity, &BigInt::from(i)).unwrap(),
                    pair.letter(parity, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn cantor_examples() {
        let family = WordFamily::new(3);
        let w2 = family.materialize(2).unwrap();
        let w3 = family.materialize(3).unwrap();
        let p = Window::from_periodic(w2.letters(), 0, 10);
        let q = Window::from_periodic(w3.letters(), 0, 10);
        assert_eq!(
            cantor_distance(&p, &q).unwrap(),
            DistanceBound::exact(Dyadic::pow2_neg(1))
        );
        let same = cantor_distance(&p, &p).unwrap();
        assert_eq!(same.lower, Dyadic::ZERO);
        assert_eq!(same.upper, Dyadic::pow2_neg(10));
        let pair = build_limit_pair(&WordFamily::new(4), 5).unwrap();
        assert_eq!(
            cantor_distance(&pair.x_window, &pair.y_window).unwrap(),
            DistanceBound::exact(Dyadic::ONE)
        );
        assert!(matches!(
            cantor_distance(&p, &win("000")),
            Err(Error::RadiusMismatch(10, 1))
        ));
    }

    #[test]
    fn shifted_windows() {
        let w = win("0110100");
        assert_eq!(w.shifted(1, 2).unwrap(), win("10100"));
        assert_eq!(w.shifted(-1, 2).unwrap(), win("01101"));
        assert!(w.shifted(2, 2).is_err());
    }
}

use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

/// Fractional bits of the fixed-point representation.
const FRAC: u32 = 124;

/// Finest power of two a [`Dyadic`] can hold exactly.
pub const MAX_EXPONENT: u32 = FRAC;

/// A non-negative dyadic rational `m · 2^{-e}` held in `u128` fixed point.
///
/// Values below `2^{-124}` are not representable; sums saturate at `16`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dyadic(u128);

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic(0);
    pub const ONE: Dyadic = Dyadic(1 << FRAC);
    /// Saturation value, larger than any distance sum.
    pub const MAX: Dyadic = Dyadic(u128::MAX);

    /// `2^{-exponent}`. Exponents beyond [`MAX_EXPONENT`] are clamped to it.
    pub fn pow2_neg(exponent: u32) -> Dyadic {
        Dyadic(1 << (FRAC - exponent.min(FRAC)))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `(m, e)` with `self = m · 2^{-e}` and `m` odd, or `None` for zero.
    pub fn parts(self) -> Option<(u128, i32)> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        Some((self.0 >> tz, FRAC as i32 - tz as i32))
    }

    /// `e` when `self = 2^{-e}` exactly.
    pub fn neg_log2(self) -> Option<i32> {
        match self.parts() {
            Some((1, e)) => Some(e),
            _ => None,
        }
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        Dyadic(self.0.saturating_add(rhs.0))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parts() {
            None => f.write_str("0"),
            Some((m, e)) if e <= 0 => write!(f, "{}", m << (-e) as u32),
            Some((1, e)) => write!(f, "2^-{e}"),
            Some((m, e)) => write!(f, "{m}*2^-{e}"),
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_and_sums() {
        assert_eq!(Dyadic::pow2_neg(0), Dyadic::ONE);
        assert_eq!(Dyadic::pow2_neg(1) + Dyadic::pow2_neg(1), Dyadic::ONE);
        let s = Dyadic::pow2_neg(3) + Dyadic::pow2_neg(4);
        assert_eq!(s.parts(), Some((3, 4)));
        assert_eq!(s.to_string(), "3*2^-4");
        assert_eq!(Dyadic::pow2_neg(37).to_string(), "2^-37");
        assert_eq!(Dyadic::ZERO.to_string(), "0");
        assert_eq!((Dyadic::ONE + Dyadic::ONE).to_string(), "2");
        assert_eq!(Dyadic::pow2_neg(6).neg_log2(), Some(6));
        assert!(Dyadic::pow2_neg(5) < Dyadic::pow2_neg(4));
        assert_eq!(Dyadic::pow2_neg(500), Dyadic::pow2_neg(MAX_EXPONENT));
    }
}

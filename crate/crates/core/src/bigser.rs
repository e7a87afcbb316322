//! Serde helpers: arbitrary-precision naturals are written as decimal strings.

use num_bigint::BigUint;
use serde::Serializer;

pub fn big<S: Serializer>(value: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_str_radix(10))
}

//! Cantor-metric windows, the limit pair `(x, y)` and the quotient system
//! obtained by identifying `σ^k x` with `σ^k y` for every `k`.
//!
//! Points are only ever seen through finite windows, so distances are
//! enclosures ([`DistanceBound`]) and every claim about the quotient is a
//! finite certificate at a stated resolution.

mod certificates;
mod dyadic;
mod relation;
mod window;

pub use certificates::{
    certificate_relation, distinctness_witness, least_period_certificate, level_bound,
    nonexpansivity_certificate, nonexpansivity_with, DistinctnessWitness, FaithfulnessWitness,
    LeastPeriod, LeastPeriodCertificate, LevelBound, NonexpansivityCertificate, DEFAULT_RADIUS,
};
pub use dyadic::{Dyadic, MAX_EXPONENT};
pub use relation::{quotient_distance, QuotientRelation, QuotientRelationSpec};
pub use window::{
    build_limit_pair, cantor_distance, limit_letter, point_window, stabilization_level,
    DistanceBound, LimitPair, Window,
};

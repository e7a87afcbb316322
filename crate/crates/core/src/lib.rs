//! Chaotic almost minimal (CAM) subshifts and their nonexpansive quotients.
//!
//! The crate builds the binary word family `w_0, w_1, …` whose periodic
//! points generate a CAM subshift on the integers, together with
//! finite-scale certificates for the structural facts behind it:
//!
//! - [`words`]: the word family with arbitrary-precision lengths and lazy
//!   letter access into exponentially long words.
//! - [`decomposition`]: rewriting `w_{2n}` into tokens over `{w_0, …, w_{2k}}`
//!   and checking the boundary-gap claims.
//! - [`language`]: periods, primitive roots, occurrence in periodic points,
//!   non-power witnesses and the coverage lemma.
//! - [`quotient`]: Cantor-metric windows, the limit pair `(x, y)`, the
//!   quotient by the orbit of that pair and nonexpansivity/faithfulness
//!   certificates.
//! - [`groups`]: the analogous construction on `Z^d` with nested centered-box
//!   transversals, periodic points, forbidden patterns and gap checks.

pub mod decomposition;
pub mod error;
pub mod groups;
pub mod language;
pub mod quotient;
pub mod words;

mod bigser;

pub use error::{Error, Result};
pub use words::{ExplicitWord, Letter, WordFamily, WordIndex};

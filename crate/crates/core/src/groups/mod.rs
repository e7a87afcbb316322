//! The construction on `Z^d`: nested subgroups `G_i = (M_i Z)^d`, centered-box
//! transversals `T_i`, the pattern pairs `P_{i,0}, P_{i,1}` and their periodic
//! points, forbidden ball patterns and the two-bullet gap check.
//!
//! `T_{i+1}` is tiled by `m_{i+1}^d` translates of `T_i`. The central tile
//! carries `P_{i,a}`, the tiles of each layout ball `B_{j,a'}` carry the
//! periodic point `x_{P_{j,a'}}`, and every other tile carries `P_{i,0}`.

mod chain;
mod forbidden;
mod gap;
mod geometry;
mod pattern;

pub use chain::{
    build_chain, build_chain_capped, AchievedSeparations, Ball, BallKey, Chain, ChainSpec,
    LevelLayout, PlacedBall, Separations, Transversal, DEFAULT_CELL_CAP,
};
pub use forbidden::{
    ball_code, forbidden_patterns, l1_ball_offsets, occurring_patterns, ForbiddenSet,
    MAX_BALL_CELLS,
};
pub use gap::{verify_gap_property, GapReport};
pub use geometry::{centered_residue, CenteredBox};
pub use pattern::{
    build_pattern_family, export_pgm, group_limit_pair, lattice_generators, periodic_point_window,
    verify_periodicity, BoxWindow, GridBox, GroupLimitPair, PatternFamily, PatternSummary,
    PatternZd, PeriodicityReport,
};

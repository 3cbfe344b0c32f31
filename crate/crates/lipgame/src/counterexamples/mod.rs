//! The negative-result families: the Gale–Berlekamp game built from a ±1
//! matrix with verified discrepancy, the mass matching-pennies game with
//! exponentially many strategies, and the restaurant game where
//! self-purification fails.

mod gale_berlekamp;
mod mass_mp;
mod restaurant;

pub use gale_berlekamp::{
    build_gb_game, find_gb_matrix, gb_bilinear, gb_untruncated, truncate, verify_discrepancy,
    DiscrepancyMode, DiscrepancyOutcome, SignMatrix,
};
pub(crate) use gale_berlekamp::{gb_core, gb_payoff};
pub use mass_mp::build_mass_mp_game;
pub(crate) use mass_mp::mass_mp_payoff;
pub use restaurant::{
    build_restaurant_game, purification_failure_experiment, restaurant_g, restaurant_home_payoff,
};

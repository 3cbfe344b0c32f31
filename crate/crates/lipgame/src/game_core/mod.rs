//! Game representations, Lipschitz/η constants, regret, best response, and
//! pure/mixed ε-equilibrium verification and search.

mod analysis;
mod expectation;
mod game;
mod polymatrix;

pub use analysis::{
    best_response, best_response_dynamics, delta_anonymous, delta_main, delta_trivial,
    eta_constant_exact, eta_reduction, exhaustive_pure_search, hamming, is_pure_eps_equilibrium,
    lipschitz_constant_estimate, lipschitz_constant_exact, regret, DynamicsOutcome,
    DynamicsStatus, SearchOutcome,
};
pub use expectation::{
    expected_payoff, expected_payoffs_player, mixed_regret, Estimate, ExpectationMode,
};
pub use game::{
    profile_count, profile_from_rank, Budget, Game, GameKind, GameSpec, MixedProfile,
    PureProfile,
};
pub(crate) use analysis::chunk_ranges;
pub(crate) use game::{advance_profile, Payoffs};
pub use polymatrix::{polymatrix_mixed_nash, polymatrix_random};

use rand::Rng as _;
use rayon::prelude::*;

use crate::anonymous::{opponent_count_pmf, AnonymousGame};
use crate::error::Result;
use crate::game_core::{Budget, GameSpec};
use crate::rng::sub_rng;

/// The restaurant congestion payoff: 1 inside the band |j−n| ≤ 0.477√n,
/// otherwise `(1 − δ(|j−n| − 0.477√n))⁺`, where `j` is the number of
/// restaurant-goers among the 2n other players.
pub fn restaurant_g(j: usize, n: usize, delta: f64) -> f64 {
    let band = 0.477 * (n as f64).sqrt();
    let dist = (j as f64 - n as f64).abs();
    if dist <= band {
        1.0
    } else {
        (1.0 - delta * (dist - band)).max(0.0)
    }
}

/// Exact `E g(X)` for `X ~ Bin(2n, 1/2)`: the fixed payoff of staying home.
///
/// Computed through the same count-distribution recursion (and the same
/// summation order) used for exact anonymous expectations, so the uniform
/// profile's two expected payoffs agree bit-for-bit.
pub fn restaurant_home_payoff(n: usize, delta: f64) -> f64 {
    let half = [0.5f64, 0.5];
    let opponents: Vec<&[f64]> = vec![&half; 2 * n];
    let pmf = opponent_count_pmf(2, &opponents);
    let mut acc = 0.0;
    for (rank, &w) in pmf.iter().enumerate() {
        if w != 0.0 {
            // colex rank = count of strategy 1 (home), so 2n − rank go out.
            acc += w * restaurant_g(2 * n - rank, n, delta);
        }
    }
    acc
}

/// The restaurant game as an anonymous game: 2n+1 players, strategy 0 = go
/// out (R), strategy 1 = stay home (H). F(R, d) = g(#R among opponents);
/// F(H, ·) is the constant `restaurant_home_payoff(n, delta)`.
pub fn build_restaurant_game(n: usize, delta: f64, budget: Budget) -> Result<AnonymousGame> {
    let players = 2 * n + 1;
    let home = restaurant_home_payoff(n, delta);
    let dist_len = 2 * n + 1; // mass 2n over two strategies
    let mut f = Vec::with_capacity(2 * dist_len);
    for rank in 0..dist_len {
        f.push(restaurant_g(2 * n - rank, n, delta));
    }
    f.extend(std::iter::repeat(home).take(dist_len));
    AnonymousGame::new_symmetric(
        players,
        2,
        delta,
        f,
        GameSpec::Restaurant { n, delta },
        budget,
    )
}

/// Fraction of profiles sampled from the uniform equilibrium that are pure
/// ε-equilibria. Regret only depends on the total number of restaurant-goers
/// `c`: an R-player's regret is `(home − g(c−1))⁺`, an H-player's is
/// `(g(c) − home)⁺`, so each sample is checked in O(1) after counting.
pub fn purification_failure_experiment(
    n: usize,
    delta: f64,
    eps: f64,
    samples: u64,
    seed: u64,
) -> f64 {
    let players = 2 * n + 1;
    let home = restaurant_home_payoff(n, delta);
    let tol = crate::DEFAULT_TOL;
    let passes: u64 = crate::game_core::chunk_ranges(
        samples.max(1) as u128,
        8 * rayon::current_num_threads(),
    )
    .into_par_iter()
    .enumerate()
    .map(|(w, (lo, hi))| {
        let mut rng = sub_rng(seed, w as u64);
        let mut local = 0u64;
        for _ in lo..hi {
            let c = (0..players).filter(|_| rng.gen::<bool>()).count();
            let r_ok = c == 0 || home - restaurant_g(c - 1, n, delta) <= eps + tol;
            let h_ok = c == players || restaurant_g(c, n, delta) - home <= eps + tol;
            if r_ok && h_ok {
                local += 1;
            }
        }
        local
    })
    .sum();
    passes as f64 / samples.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymous::binomial;
    use crate::game_core::{
        lipschitz_constant_exact, mixed_regret, ExpectationMode, Game, GameKind, MixedProfile,
    };
    use crate::DEFAULT_BUDGET;
    use std::sync::Arc;

    #[test]
    fn g_piecewise_values() {
        assert_eq!(restaurant_g(100, 100, 0.1), 1.0);
        // n = 100, δ = 0.1, j = 110: (1 − 0.1·(10 − 4.77))⁺ = 0.477.
        let v = restaurant_g(110, 100, 0.1);
        assert!((v - 0.477).abs() < 1e-12);
        // Deep in the tail the positive part clamps to zero.
        assert_eq!(restaurant_g(0, 100, 1.0), 0.0);
    }

    /// Independent oracle: direct binomial summation with exact C(2n, j)
    /// (log-space for larger n), not the count-distribution recursion.
    fn home_oracle(n: usize, delta: f64) -> f64 {
        let two_n = 2 * n;
        if two_n <= 60 {
            let denom = 2f64.powi(two_n as i32);
            (0..=two_n)
                .map(|j| restaurant_g(j, n, delta) * binomial(two_n as u64, j as u64) as f64 / denom)
                .sum()
        } else {
            let ln_fact: Vec<f64> = {
                let mut v = vec![0.0f64; two_n + 1];
                for i in 1..=two_n {
                    v[i] = v[i - 1] + (i as f64).ln();
                }
                v
            };
            (0..=two_n)
                .map(|j| {
                    let ln_p = ln_fact[two_n] - ln_fact[j] - ln_fact[two_n - j]
                        - two_n as f64 * 2f64.ln();
                    restaurant_g(j, n, delta) * ln_p.exp()
                })
                .sum()
        }
    }

    #[test]
    fn home_payoff_matches_binomial_oracle() {
        for (n, delta) in [(10usize, 0.2), (25, 0.1), (100, 0.1)] {
            let fast = restaurant_home_payoff(n, delta);
            let slow = home_oracle(n, delta);
            assert!((fast - slow).abs() < 1e-10, "n={n}: {fast} vs {slow}");
        }
    }

    #[test]
    fn home_payoff_one_when_band_covers_everything() {
        // δ = 0 keeps the slope flat at 1 outside the band too.
        assert_eq!(restaurant_home_payoff(20, 0.0), 1.0);
    }

    #[test]
    fn home_payoff_matches_monte_carlo() {
        use rand::Rng as _;
        let n = 50;
        let delta = 0.1;
        let exact = restaurant_home_payoff(n, delta);
        let mut rng = crate::rng::rng_from_seed(3);
        let samples = 1_000_000u64;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..samples {
            let j = (0..2 * n).filter(|_| rng.gen::<bool>()).count();
            let v = restaurant_g(j, n, delta);
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / samples as f64;
        let var = (acc2 / samples as f64 - mean * mean).max(0.0);
        let se = (var / samples as f64).sqrt();
        assert!((exact - mean).abs() <= 3.0 * se + 1e-9);
    }

    #[test]
    fn uniform_profile_has_exactly_zero_mixed_regret() {
        let ag = build_restaurant_game(30, 0.1, DEFAULT_BUDGET).unwrap();
        let g = Game::from_anonymous(Arc::new(ag), GameKind::Restaurant);
        let mu = MixedProfile::uniform(&g);
        let r = mixed_regret(
            &g,
            &mu,
            ExpectationMode::Exact {
                budget: DEFAULT_BUDGET,
            },
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn home_payoff_independent_of_opponents() {
        let ag = build_restaurant_game(5, 0.1, DEFAULT_BUDGET).unwrap();
        assert!(ag.constant_value(0, 1).is_some());
        // Flipping any opponent changes F(H, ·) by 0.
        for rank in 0..ag.dists().len() {
            assert_eq!(ag.payoff_by_rank(3, 1, rank), ag.payoff_by_rank(3, 1, 0));
        }
    }

    #[test]
    fn induced_lipschitz_at_most_delta_small_n() {
        let delta = 0.3;
        let ag = build_restaurant_game(2, delta, DEFAULT_BUDGET).unwrap();
        let g = Game::from_anonymous(Arc::new(ag), GameKind::Restaurant);
        let d = lipschitz_constant_exact(&g, DEFAULT_BUDGET).unwrap();
        assert!(d <= delta + 1e-12);
    }

    #[test]
    fn failure_probability_one_for_large_eps() {
        let p = purification_failure_experiment(20, 0.1, 1.0, 2000, 5);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn failure_experiment_deterministic_per_seed() {
        let a = purification_failure_experiment(30, 0.1, 0.25, 3000, 11);
        let b = purification_failure_experiment(30, 0.1, 0.25, 3000, 11);
        assert_eq!(a, b);
    }
}

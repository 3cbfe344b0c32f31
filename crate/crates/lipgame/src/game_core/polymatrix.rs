use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::game_core::game::{Budget, Game, GameKind, GameSpec, MixedProfile, Payoffs};
use crate::game_core::{mixed_regret, ExpectationMode};
use crate::linalg;
use crate::rng::rng_from_seed;

/// Pairwise payoff tables: `f_i(a) = Σ_{j≠i} φ_{ij}(a_i, a_j)` with every
/// φ entry in [−δ/2, +δ/2], so a single-opponent flip moves exactly one
/// summand by at most δ.
pub struct PolymatrixTables {
    n: usize,
    m: usize,
    /// φ flattened by (i, j, a_i, a_j); the i = j block is unused zeros.
    phi: Vec<f64>,
}

impl PolymatrixTables {
    pub(crate) fn entry(&self, i: usize, j: usize, ai: usize, aj: usize) -> f64 {
        self.phi[((i * self.n + j) * self.m + ai) * self.m + aj]
    }

    pub fn payoff(&self, i: usize, a: &[usize]) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.n {
            if j != i {
                acc += self.entry(i, j, a[i], a[j]);
            }
        }
        acc
    }
}

/// Seeded generator of games with a certified Lipschitz bound δ(G) ≤ δ.
pub fn polymatrix_random(n: usize, m: usize, delta: f64, seed: u64) -> Game {
    let mut rng = rng_from_seed(seed);
    let mut phi = vec![0.0f64; n * n * m * m];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for ai in 0..m {
                for aj in 0..m {
                    let v = if delta == 0.0 {
                        0.0
                    } else {
                        rng.gen_range(-delta / 2.0..=delta / 2.0)
                    };
                    phi[((i * n + j) * m + ai) * m + aj] = v;
                }
            }
        }
    }
    Game::from_parts(
        vec![m; n],
        GameKind::Polymatrix,
        Payoffs::Polymatrix(Arc::new(PolymatrixTables { n, m, phi })),
        Some(GameSpec::Polymatrix { n, m, delta, seed }),
    )
}

/// Exact mixed Nash equilibrium of a two-strategy polymatrix game by support
/// enumeration, smallest mixing sets first (so a pure Nash equilibrium wins
/// when one exists). Returns the profile and its verified exact mixed regret.
///
/// The deviation gain of strategy 0 over 1 is linear in the opponents'
/// probabilities q_j = μ_j[0]:
/// `Δ_i(q) = Σ_{j≠i} (c_ij·q_j + b_ij)` with
/// `c_ij = φ(0,0) − φ(1,0) − φ(0,1) + φ(1,1)` and `b_ij = φ(0,1) − φ(1,1)`,
/// so each candidate support reduces to one small linear system.
pub fn polymatrix_mixed_nash(g: &Game, tol: f64, budget: Budget) -> Result<(MixedProfile, f64)> {
    let t = match &g.payoffs {
        Payoffs::Polymatrix(t) if t.m == 2 => Arc::clone(t),
        Payoffs::Polymatrix(_) => {
            return Err(Error::InvalidGame(
                "mixed Nash solver supports two-strategy polymatrix games only".into(),
            ))
        }
        _ => {
            return Err(Error::InvalidGame(
                "mixed Nash solver needs a polymatrix game".into(),
            ))
        }
    };
    let n = t.n;
    if n > 20 {
        return Err(Error::BudgetExceeded {
            required: 3u128.pow(n as u32),
            budget,
        });
    }
    let c: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        t.entry(i, j, 0, 0) - t.entry(i, j, 1, 0) - t.entry(i, j, 0, 1)
                            + t.entry(i, j, 1, 1)
                    }
                })
                .collect()
        })
        .collect();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        t.entry(i, j, 0, 1) - t.entry(i, j, 1, 1)
                    }
                })
                .collect()
        })
        .collect();

    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mix_mask in masks {
        let mixers: Vec<usize> = (0..n).filter(|&i| mix_mask >> i & 1 == 1).collect();
        let pures: Vec<usize> = (0..n).filter(|&i| mix_mask >> i & 1 == 0).collect();
        let k = mixers.len();
        // Pure players' strategies enumerated as bits (1 = strategy 1).
        for pure_bits in 0..1u64 << pures.len() {
            let mut q = vec![0.0f64; n];
            for (idx, &p) in pures.iter().enumerate() {
                q[p] = if pure_bits >> idx & 1 == 1 { 0.0 } else { 1.0 };
            }
            if k > 0 {
                // Δ_i(q) = 0 for every mixer i.
                let mut a = vec![vec![0.0f64; k]; k];
                let mut rhs = vec![0.0f64; k];
                for (row, &i) in mixers.iter().enumerate() {
                    let mut r = 0.0;
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        r -= b[i][j];
                        if mix_mask >> j & 1 == 1 {
                            let col = mixers.iter().position(|&x| x == j).unwrap();
                            a[row][col] = c[i][j];
                        } else {
                            r -= c[i][j] * q[j];
                        }
                    }
                    rhs[row] = r;
                }
                let sol = match linalg::solve(&a, &rhs) {
                    Some(s) => s,
                    None => continue,
                };
                if sol.iter().any(|&x| !(1e-9..=1.0 - 1e-9).contains(&x)) {
                    continue;
                }
                for (idx, &i) in mixers.iter().enumerate() {
                    q[i] = sol[idx];
                }
            }
            // Pure players must weakly prefer their assigned strategy.
            let gain_ok = pures.iter().all(|&i| {
                let delta_i: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| c[i][j] * q[j] + b[i][j])
                    .sum();
                if q[i] == 1.0 {
                    delta_i >= -1e-12
                } else {
                    delta_i <= 1e-12
                }
            });
            if !gain_ok {
                continue;
            }
            let mu = MixedProfile {
                distributions: q.iter().map(|&p| vec![p, 1.0 - p]).collect(),
            };
            let slack = mixed_regret(g, &mu, ExpectationMode::Exact { budget })?;
            if slack <= tol {
                return Ok((mu, slack));
            }
        }
    }
    Err(Error::NoEquilibriumFound(
        "support enumeration exhausted without a verified equilibrium".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::{eta_constant_exact, lipschitz_constant_exact};
    use crate::DEFAULT_BUDGET;

    #[test]
    fn delta_zero_is_constant_in_opponents() {
        let g = polymatrix_random(4, 3, 0.0, 1);
        assert_eq!(lipschitz_constant_exact(&g, DEFAULT_BUDGET).unwrap(), 0.0);
    }

    #[test]
    fn construction_bound_holds() {
        for seed in 0..5 {
            let g = polymatrix_random(5, 2, 0.1, seed);
            assert!(lipschitz_constant_exact(&g, DEFAULT_BUDGET).unwrap() <= 0.1);
        }
    }

    #[test]
    fn eta_at_most_twice_delta_over_seeds() {
        for seed in 0..20 {
            let g = polymatrix_random(5, 2, 0.2, seed);
            let d = lipschitz_constant_exact(&g, DEFAULT_BUDGET).unwrap();
            let e = eta_constant_exact(&g, DEFAULT_BUDGET).unwrap();
            assert!(e <= 2.0 * d + 1e-12);
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = polymatrix_random(4, 2, 0.3, 42);
        let b = polymatrix_random(4, 2, 0.3, 42);
        let profile = [1usize, 0, 1, 1];
        for i in 0..4 {
            assert_eq!(a.payoff(i, &profile).to_bits(), b.payoff(i, &profile).to_bits());
        }
    }

    #[test]
    fn mixed_nash_found_with_tiny_regret() {
        for seed in [0u64, 1, 2, 3, 4] {
            let g = polymatrix_random(6, 2, 0.1, seed);
            let (mu, slack) = polymatrix_mixed_nash(&g, 1e-6, DEFAULT_BUDGET).unwrap();
            assert!(slack <= 1e-6, "seed {seed}: slack {slack}");
            mu.validate(&g).unwrap();
        }
    }
}

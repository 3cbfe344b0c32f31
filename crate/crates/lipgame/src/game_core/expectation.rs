use serde::{Deserialize, Serialize};

use crate::anonymous::{opponent_count_pmf, DistIndex};
use crate::error::{Error, Result};
use crate::game_core::game::{
    advance_profile, check_budget, Budget, Game, MixedProfile, Payoffs,
};
use crate::rng::sub_rng;

/// A real value with its Monte-Carlo standard error (0 for exact results).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn exact(value: f64) -> Estimate {
        Estimate {
            value,
            std_error: 0.0,
        }
    }
}

/// How to evaluate expectations under a mixed profile.
#[derive(Clone, Copy, Debug)]
pub enum ExpectationMode {
    /// Exact summation (deterministic ascending order); refuses above budget.
    Exact { budget: Budget },
    /// Sample mean over `samples` draws with a reported standard error.
    MonteCarlo { samples: u64, seed: u64 },
}

/// `E_{μ_{−i}} f_i(s, ·)` for every own strategy `s` of player `i`.
pub fn expected_payoffs_player(
    g: &Game,
    i: usize,
    mu: &MixedProfile,
    mode: ExpectationMode,
) -> Result<Vec<Estimate>> {
    mu.validate(g)?;
    match mode {
        ExpectationMode::Exact { budget } => exact_row(g, i, mu, budget),
        ExpectationMode::MonteCarlo { samples, seed } => Ok(mc_row(g, i, mu, samples, seed)),
    }
}

/// `E_{μ_{−i}} f_i(s, ·)` for a single strategy.
pub fn expected_payoff(
    g: &Game,
    i: usize,
    s: usize,
    mu: &MixedProfile,
    mode: ExpectationMode,
) -> Result<Estimate> {
    if s >= g.strategy_counts()[i] {
        return Err(Error::InvalidStrategy {
            player: i,
            strategy: s,
            count: g.strategy_counts()[i],
        });
    }
    Ok(expected_payoffs_player(g, i, mu, mode)?[s])
}

fn exact_row(g: &Game, i: usize, mu: &MixedProfile, budget: Budget) -> Result<Vec<Estimate>> {
    match &g.payoffs {
        Payoffs::Anonymous(ag) => {
            check_budget(DistIndex::size_of(ag.n() as u32 - 1, ag.m()), budget)?;
            let opponents: Vec<&[f64]> = (0..g.num_players())
                .filter(|&j| j != i)
                .map(|j| mu.distributions[j].as_slice())
                .collect();
            let mut pmf: Option<Vec<f64>> = None;
            let mut out = Vec::with_capacity(ag.m());
            for s in 0..ag.m() {
                if let Some(c) = ag.constant_value(i, s) {
                    out.push(Estimate::exact(c));
                    continue;
                }
                let pmf = pmf.get_or_insert_with(|| opponent_count_pmf(ag.m(), &opponents));
                let mut acc = 0.0;
                for (rank, &w) in pmf.iter().enumerate() {
                    if w != 0.0 {
                        acc += w * ag.payoff_by_rank(i, s, rank);
                    }
                }
                out.push(Estimate::exact(acc));
            }
            Ok(out)
        }
        Payoffs::Replicated { base, l } => {
            // Independence across groups turns the tuple average into the
            // base expectation under per-group mean mixtures.
            let l = *l;
            let group = i / l;
            let base_counts = base.strategy_counts().to_vec();
            let means: Vec<Vec<f64>> = (0..base.num_players())
                .map(|j| {
                    let mut mean = vec![0.0; base_counts[j]];
                    for u in 0..l {
                        for (s, &p) in mu.distributions[j * l + u].iter().enumerate() {
                            mean[s] += p;
                        }
                    }
                    for v in &mut mean {
                        *v /= l as f64;
                    }
                    mean
                })
                .collect();
            let base_mu = MixedProfile {
                distributions: means,
            };
            exact_row_generic(base, group, &base_mu, budget)
        }
        _ => exact_row_generic(g, i, mu, budget),
    }
}

/// Enumerate opponent profiles ascending (deterministic summation order).
fn exact_row_generic(
    g: &Game,
    i: usize,
    mu: &MixedProfile,
    budget: Budget,
) -> Result<Vec<Estimate>> {
    let counts = g.strategy_counts().to_vec();
    let n = counts.len();
    let m_i = counts[i];
    let opp_total: u128 = counts
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .fold(1u128, |acc, (_, &m)| acc.saturating_mul(m as u128));
    check_budget(opp_total.saturating_mul(m_i as u128), budget)?;

    let mut opp_counts = counts.clone();
    opp_counts[i] = 1; // freeze player i in the odometer
    let mut a = vec![0usize; n];
    let mut acc = vec![0.0f64; m_i];
    loop {
        let mut w = 1.0;
        for j in 0..n {
            if j != i {
                w *= mu.distributions[j][a[j]];
            }
        }
        if w != 0.0 {
            let row = g.deviation_row(i, &a);
            for s in 0..m_i {
                acc[s] += w * row[s];
            }
        }
        if !advance_profile(&opp_counts, &mut a) {
            break;
        }
    }
    Ok(acc.into_iter().map(Estimate::exact).collect())
}

fn mc_row(g: &Game, i: usize, mu: &MixedProfile, samples: u64, seed: u64) -> Vec<Estimate> {
    let m_i = g.strategy_counts()[i];
    let mut rng = sub_rng(seed, i as u64);
    let mut mean = vec![0.0f64; m_i];
    let mut m2 = vec![0.0f64; m_i];
    let samples = samples.max(1);
    for t in 0..samples {
        let a = mu.sample(&mut rng);
        let row = g.deviation_row(i, &a);
        for s in 0..m_i {
            let d = row[s] - mean[s];
            mean[s] += d / (t + 1) as f64;
            m2[s] += d * (row[s] - mean[s]);
        }
    }
    (0..m_i)
        .map(|s| Estimate {
            value: mean[s],
            std_error: if samples > 1 {
                (m2[s] / (samples - 1) as f64 / samples as f64).sqrt()
            } else {
                f64::INFINITY
            },
        })
        .collect()
}

/// Maximum over players of the expected deviation gain
/// `max_d E f_i(d, μ) − Σ_s μ_i[s]·E f_i(s, μ)`.
///
/// For symmetric anonymous games with identical player mixtures the
/// per-player expectation row is computed once and shared, so structurally
/// equal inputs give bit-identical regrets.
pub fn mixed_regret(g: &Game, mu: &MixedProfile, mode: ExpectationMode) -> Result<f64> {
    mu.validate(g)?;
    let n = g.num_players();
    let shared_row: Option<Vec<Estimate>> = match &g.payoffs {
        Payoffs::Anonymous(ag)
            if ag.is_symmetric()
                && mu
                    .distributions
                    .iter()
                    .all(|d| bits(d) == bits(&mu.distributions[0])) =>
        {
            Some(expected_payoffs_player(g, 0, mu, mode)?)
        }
        _ => None,
    };
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let row = match &shared_row {
            Some(r) => r.clone(),
            None => expected_payoffs_player(g, i, mu, mode)?,
        };
        let best = row
            .iter()
            .map(|e| e.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let current: f64 = mu.distributions[i]
            .iter()
            .zip(&row)
            .map(|(&p, e)| p * e.value)
            .sum();
        worst = worst.max(best - current);
    }
    Ok(worst)
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::{regret, PureProfile};
    use crate::testutil::{constant, matching_pennies};
    use crate::DEFAULT_BUDGET;

    const EXACT: ExpectationMode = ExpectationMode::Exact {
        budget: DEFAULT_BUDGET,
    };

    #[test]
    fn constant_game_expectation_is_the_constant() {
        let g = constant(&[2, 2, 2], 3.5);
        let mu = MixedProfile::uniform(&g);
        let e = expected_payoff(&g, 1, 0, &mu, EXACT).unwrap();
        assert_eq!(e.value, 3.5);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn matching_pennies_uniform_is_zero() {
        let g = matching_pennies();
        let mu = MixedProfile::uniform(&g);
        for i in 0..2 {
            for s in 0..2 {
                assert_eq!(expected_payoff(&g, i, s, &mu, EXACT).unwrap().value, 0.0);
            }
        }
        assert_eq!(mixed_regret(&g, &mu, EXACT).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_mixed_regret_matches_pure_regret() {
        let g = matching_pennies();
        let a = PureProfile(vec![0, 0]);
        let mu = MixedProfile::degenerate(&a, g.strategy_counts());
        let mr = mixed_regret(&g, &mu, EXACT).unwrap();
        let pure = (0..2).map(|i| regret(&g, i, &a.0)).fold(0.0, f64::max);
        assert_eq!(mr, pure);
    }

    #[test]
    fn exact_budget_refused() {
        let g = matching_pennies();
        let mu = MixedProfile::uniform(&g);
        let err = expected_payoff(
            &g,
            0,
            0,
            &mu,
            ExpectationMode::Exact { budget: 1 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn monte_carlo_converges_on_matching_pennies() {
        // |estimate| ≤ 4/√samples should hold with wide margin for most seeds.
        let g = matching_pennies();
        let mu = MixedProfile::uniform(&g);
        let samples = 10_000u64;
        let mut ok = 0;
        for seed in 0..20 {
            let e = expected_payoff(
                &g,
                0,
                0,
                &mu,
                ExpectationMode::MonteCarlo { samples, seed },
            )
            .unwrap();
            if e.value.abs() <= 4.0 / (samples as f64).sqrt() {
                ok += 1;
            }
            assert!(e.std_error > 0.0 && e.std_error < 0.05);
        }
        assert!(ok >= 19, "only {ok}/20 seeds within the bound");
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let g = matching_pennies();
        let mu = MixedProfile::uniform(&g);
        let mode = ExpectationMode::MonteCarlo {
            samples: 500,
            seed: 9,
        };
        let a = expected_payoff(&g, 1, 0, &mu, mode).unwrap();
        let b = expected_payoff(&g, 1, 0, &mu, mode).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn anonymous_exact_matches_generic_enumeration() {
        let ag = crate::anonymous::random_anonymous(5, 2, 0.1, 13).unwrap();
        let g = Game::from_anonymous(std::sync::Arc::new(ag), crate::game_core::GameKind::Anonymous);
        let mut mu = MixedProfile::uniform(&g);
        mu.distributions[2] = vec![0.25, 0.75];
        let fast = expected_payoffs_player(&g, 1, &mu, EXACT).unwrap();
        let slow = exact_row_generic(&g, 1, &mu, DEFAULT_BUDGET).unwrap();
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f.value - s.value).abs() < 1e-12);
        }
    }
}

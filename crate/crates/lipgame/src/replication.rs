//! The replication construction: blow a base game up into n·L players (L
//! copies per role), find a pure ε-equilibrium there, and project group
//! frequencies back to a mixed ε-equilibrium of the base game.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{
    advance_profile, exhaustive_pure_search, lipschitz_constant_exact, mixed_regret, Budget,
    ExpectationMode, Game, GameKind, GameSpec, MixedProfile, Payoffs, PureProfile,
};
use crate::purification::{certificate, default_max_tries, self_purify, PurificationCertificate};
use crate::DEFAULT_TOL;

/// Replicate `base` into n·L players. Player `t` belongs to group `t / L`
/// (groups are contiguous); her payoff is the average of the base payoffs
/// over all n-tuples through her, one member per other group.
pub fn replicate(base: Arc<Game>, l: usize) -> Result<Game> {
    if l < 1 {
        return Err(Error::InvalidGame("replication factor must be ≥ 1".into()));
    }
    let counts: Vec<usize> = base
        .strategy_counts()
        .iter()
        .flat_map(|&m| std::iter::repeat(m).take(l))
        .collect();
    let spec = base.spec().map(|s| GameSpec::Replicated {
        base: Box::new(s.clone()),
        l,
    });
    Ok(Game::from_parts(
        counts,
        GameKind::Replicated,
        Payoffs::Replicated { base, l },
        spec,
    ))
}

/// Per-group strategy counts of a replica profile.
fn group_counts(base: &Game, l: usize, a: &[usize]) -> Vec<Vec<u64>> {
    let n = base.num_players();
    let mut counts: Vec<Vec<u64>> = base
        .strategy_counts()
        .iter()
        .map(|&m| vec![0u64; m])
        .collect();
    for (t, &s) in a.iter().enumerate() {
        counts[t / l][s] += 1;
    }
    debug_assert_eq!(a.len(), n * l);
    counts
}

/// Payoffs of a group-`gi` player for each own strategy, given the other
/// groups' counts: `(Σ_{a_{−gi}} f_gi(d, a_{−gi}) · Π_j counts_j[a_j]) / L^{n−1}`.
/// The tuple sum is taken over integer weights with one final division, so
/// it is exact whenever the base payoffs are.
fn group_row(base: &Game, l: usize, gi: usize, counts: &[Vec<u64>]) -> Vec<f64> {
    let n = base.num_players();
    let m_gi = base.strategy_counts()[gi];
    let mut acc = vec![0.0f64; m_gi];
    let mut odometer_counts = base.strategy_counts().to_vec();
    odometer_counts[gi] = 1;
    let mut a = vec![0usize; n];
    loop {
        let mut w = 1.0f64;
        for j in 0..n {
            if j != gi {
                w *= counts[j][a[j]] as f64;
            }
        }
        if w != 0.0 {
            for d in 0..m_gi {
                a[gi] = d;
                acc[d] += w * base.payoff(gi, &a);
            }
            a[gi] = 0;
        }
        if !advance_profile(&odometer_counts, &mut a) {
            break;
        }
    }
    let scale = (l as f64).powi(n as i32 - 1);
    for v in &mut acc {
        *v /= scale;
    }
    acc
}

pub(crate) fn replicated_payoff(base: &Game, l: usize, t: usize, a: &[usize]) -> f64 {
    replicated_deviation_row(base, l, t, a)[a[t]]
}

pub(crate) fn replicated_deviation_row(base: &Game, l: usize, t: usize, a: &[usize]) -> Vec<f64> {
    let counts = group_counts(base, l, a);
    group_row(base, l, t / l, &counts)
}

/// One shared row per group: a player's payoff ignores her own group
/// entirely, so the whole table needs only n base-opponent enumerations.
pub(crate) fn replicated_deviation_table(base: &Game, l: usize, a: &[usize]) -> Vec<Vec<f64>> {
    let counts = group_counts(base, l, a);
    let rows: Vec<Vec<f64>> = (0..base.num_players())
        .map(|gi| group_row(base, l, gi, &counts))
        .collect();
    a.iter()
        .enumerate()
        .map(|(t, _)| rows[t / l].clone())
        .collect()
}

/// Exact check of the Appendix bound δ(G′) ≤ δ(G)/L on an enumerable pair.
pub fn replication_lipschitz_check(base: &Arc<Game>, l: usize, budget: Budget) -> Result<bool> {
    let replica = replicate(Arc::clone(base), l)?;
    let d_base = lipschitz_constant_exact(base, budget)?;
    let d_rep = lipschitz_constant_exact(&replica, budget)?;
    Ok(d_rep <= d_base / l as f64 + 1e-12)
}

/// Empirical frequency vector of each group: μ_j[s] = counts_j[s] / L.
pub fn project(rg: &Game, b: &PureProfile) -> Result<MixedProfile> {
    let (base, l) = match &rg.payoffs {
        Payoffs::Replicated { base, l } => (Arc::clone(base), *l),
        _ => {
            return Err(Error::InvalidGame(
                "projection needs a replicated game".into(),
            ))
        }
    };
    rg.validate_profile(&b.0)?;
    let counts = group_counts(&base, l, &b.0);
    Ok(MixedProfile {
        distributions: counts
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as f64 / l as f64).collect())
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicationMethod {
    /// Self-purify the replica starting from the L-fold copy of a mixed
    /// equilibrium of the base game.
    SelfPurify,
    /// Exhaustive pure search on the replica (tiny L only).
    Search,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub mu: MixedProfile,
    pub mixed_regret: f64,
    /// Whether the projected profile meets the requested ε (with tolerance).
    pub meets_eps: bool,
    pub l: usize,
    pub delta_replica: f64,
    pub certificate: Option<PurificationCertificate>,
    pub tries: Option<u64>,
}

/// Run the full pipeline: pure ε-equilibrium of the replica by the chosen
/// method, projected back, with the projection's exact base-game regret.
///
/// `base_mixed` seeds the self-purification sampler (each group member copies
/// its group's mixture) and must itself be a mixed equilibrium of the base
/// for the certificate to mean anything; it is ignored by `Search`.
pub fn nash_via_replication(
    base: &Arc<Game>,
    eps: f64,
    l: usize,
    method: ReplicationMethod,
    base_mixed: Option<&MixedProfile>,
    seed: u64,
    budget: Budget,
) -> Result<ReplicationOutcome> {
    let replica = Arc::new(replicate(Arc::clone(base), l)?);
    let n = base.num_players();
    let d_base = lipschitz_constant_exact(base, budget)?;
    let delta_replica = d_base / l as f64;
    let (pure, certificate, tries) = match method {
        ReplicationMethod::SelfPurify => {
            let base_mixed = base_mixed.ok_or_else(|| {
                Error::InvalidMixed("self_purify needs a base mixed equilibrium".into())
            })?;
            let mu_rep = MixedProfile {
                distributions: (0..n)
                    .flat_map(|j| std::iter::repeat(base_mixed.distributions[j].clone()).take(l))
                    .collect(),
            };
            let m_max = *base.strategy_counts().iter().max().unwrap();
            let cert = certificate(eps, delta_replica.max(f64::MIN_POSITIVE), n * l, m_max)?;
            let max_tries = default_max_tries(&cert);
            let out = self_purify(&replica, &mu_rep, eps, max_tries, seed, budget)?;
            match out.profile {
                Some(p) => (p, Some(cert), Some(out.tries)),
                None => {
                    return Err(Error::NoEquilibriumFound(format!(
                        "self-purification exhausted {} tries (worst deviation {:.6})",
                        out.tries, out.worst_deviation
                    )))
                }
            }
        }
        ReplicationMethod::Search => {
            let found = exhaustive_pure_search(&replica, eps, DEFAULT_TOL, budget)?;
            match found.first {
                Some(p) => (p, None, None),
                None => {
                    return Err(Error::NoEquilibriumFound(
                        "replica has no pure ε-equilibrium in budget".into(),
                    ))
                }
            }
        }
    };
    let mu = project(&replica, &pure)?;
    let achieved = mixed_regret(base, &mu, ExpectationMode::Exact { budget })?;
    Ok(ReplicationOutcome {
        meets_eps: achieved <= eps + DEFAULT_TOL,
        mu,
        mixed_regret: achieved,
        l,
        delta_replica,
        certificate,
        tries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::{is_pure_eps_equilibrium, profile_from_rank, regret};
    use crate::testutil::{constant, coordination, matching_pennies};
    use crate::DEFAULT_BUDGET;

    #[test]
    fn l_equal_one_is_the_base_game() {
        let base = Arc::new(matching_pennies());
        let rg = replicate(Arc::clone(&base), 1).unwrap();
        let counts = [2usize, 2];
        let mut a = vec![0usize; 2];
        loop {
            for i in 0..2 {
                assert_eq!(rg.payoff(i, &a), base.payoff(i, &a));
            }
            if !advance_profile(&counts, &mut a) {
                break;
            }
        }
    }

    #[test]
    fn constant_base_stays_constant() {
        let base = Arc::new(constant(&[2, 2], 1.25));
        let rg = replicate(base, 3).unwrap();
        assert_eq!(rg.payoff(4, &[0, 1, 0, 1, 1, 0]), 1.25);
    }

    /// Independent oracle: enumerate every n-tuple through player `t` and
    /// average the base payoffs directly.
    fn tuple_average_oracle(base: &Game, l: usize, t: usize, a: &[usize]) -> f64 {
        let n = base.num_players();
        let gi = t / l;
        let others: Vec<usize> = (0..n).filter(|&j| j != gi).collect();
        let mut picks = vec![0usize; others.len()];
        let mut acc = 0.0;
        let mut tuples = 0u64;
        loop {
            let mut prof = vec![0usize; n];
            prof[gi] = a[t];
            for (idx, &j) in others.iter().enumerate() {
                prof[j] = a[j * l + picks[idx]];
            }
            acc += base.payoff(gi, &prof);
            tuples += 1;
            // odometer over member picks in the other groups
            let mut pos = 0;
            loop {
                if pos == picks.len() {
                    assert_eq!(tuples, (l as u64).pow(others.len() as u32));
                    return acc / tuples as f64;
                }
                picks[pos] += 1;
                if picks[pos] < l {
                    break;
                }
                picks[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn count_based_matches_tuple_average_exactly() {
        // Dyadic payoffs keep both summation orders exact, so equality is
        // bitwise.
        let base = Arc::new(matching_pennies());
        for l in 1..=3usize {
            let rg = replicate(Arc::clone(&base), l).unwrap();
            let counts = rg.strategy_counts().to_vec();
            let total = crate::game_core::profile_count(&counts);
            for rank in 0..total {
                let a = profile_from_rank(&counts, rank);
                for t in 0..2 * l {
                    let fast = rg.payoff(t, &a);
                    let slow = tuple_average_oracle(&base, l, t, &a);
                    assert_eq!(fast.to_bits(), slow.to_bits());
                }
            }
        }
    }

    #[test]
    fn deviation_table_matches_per_player_rows() {
        let base = Arc::new(coordination());
        let rg = replicate(Arc::clone(&base), 2).unwrap();
        let a = [0usize, 1, 1, 0];
        let table = rg.deviation_table(&a);
        for t in 0..4 {
            assert_eq!(table[t], replicated_deviation_row(&base, 2, t, &a));
        }
    }

    #[test]
    fn lipschitz_shrinks_by_factor_l() {
        let base = Arc::new(matching_pennies());
        assert!(replication_lipschitz_check(&base, 2, DEFAULT_BUDGET).unwrap());
        let rnd = Arc::new(crate::game_core::polymatrix_random(2, 2, 0.8, 3));
        assert!(replication_lipschitz_check(&rnd, 3, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn projection_bookkeeping() {
        let base = Arc::new(matching_pennies());
        let rg = replicate(Arc::clone(&base), 2).unwrap();
        let mu = project(&rg, &PureProfile(vec![0, 0, 0, 1])).unwrap();
        assert_eq!(mu.distributions[0], vec![1.0, 0.0]);
        assert_eq!(mu.distributions[1], vec![0.5, 0.5]);
    }

    #[test]
    fn pure_degenerate_projection_is_base_equilibrium() {
        let base = Arc::new(coordination());
        let rg = replicate(Arc::clone(&base), 3).unwrap();
        let b = PureProfile(vec![1usize; 6]);
        assert!(is_pure_eps_equilibrium(&rg, &b, 0.0, 1e-9));
        let mu = project(&rg, &b).unwrap();
        for i in 0..2 {
            assert_eq!(regret(&base, i, &[1, 1]), 0.0);
            assert_eq!(mu.distributions[i], vec![0.0, 1.0]);
        }
    }

    #[test]
    fn search_recovers_coordination_equilibrium() {
        let base = Arc::new(coordination());
        let out = nash_via_replication(
            &base,
            0.0,
            2,
            ReplicationMethod::Search,
            None,
            0,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(out.meets_eps);
        assert_eq!(out.mixed_regret, 0.0);
        // All mass on one of the two coordination outcomes.
        let d = &out.mu.distributions;
        assert!(d[0] == d[1] && (d[0] == vec![1.0, 0.0] || d[0] == vec![0.0, 1.0]));
    }
}

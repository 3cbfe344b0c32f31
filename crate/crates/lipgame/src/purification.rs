//! The constructive side of the existence results: the two-step best
//! response, the E-test sampler that purifies a mixed equilibrium, and the
//! union-bound certificate that predicts how often sampling succeeds.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{
    best_response, expected_payoffs_player, is_pure_eps_equilibrium, Budget, Estimate,
    ExpectationMode, Game, MixedProfile, PureProfile,
};
use crate::rng::sub_rng;
use crate::DEFAULT_TOL;

/// Union-bound certificate for self-purification: with probability at least
/// `success_lower_bound`, a profile drawn from a mixed Nash equilibrium of a
/// δ-Lipschitz game passes every E-test (and is then a pure ε-equilibrium).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PurificationCertificate {
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    pub m: usize,
    /// `2·exp(−ε² / (8(n−1)δ²))`.
    pub per_event_bound: f64,
    /// `min(1, n·m·per_event_bound)`.
    pub union_bound: f64,
    /// `max(0, 1 − union_bound)`.
    pub success_lower_bound: f64,
}

pub fn certificate(eps: f64, delta: f64, n: usize, m: usize) -> Result<PurificationCertificate> {
    if !(eps > 0.0) {
        return Err(Error::Domain("eps must be positive".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    if n < 2 || m < 1 {
        return Err(Error::Domain("need n ≥ 2 and m ≥ 1".into()));
    }
    let per_event_bound = 2.0 * (-eps * eps / (8.0 * (n as f64 - 1.0) * delta * delta)).exp();
    let union_bound = (n as f64 * m as f64 * per_event_bound).min(1.0);
    Ok(PurificationCertificate {
        eps,
        delta,
        n,
        m,
        per_event_bound,
        union_bound,
        success_lower_bound: (1.0 - union_bound).max(0.0),
    })
}

/// `ceil(10 / success_lower_bound)` when the certificate is positive, else
/// 10^4.
pub fn default_max_tries(cert: &PurificationCertificate) -> u64 {
    if cert.success_lower_bound > 0.0 {
        (10.0 / cert.success_lower_bound).ceil() as u64
    } else {
        10_000
    }
}

/// Simultaneous best response to `a0`: `a*_i = best_response(g, i, a0)`.
/// A pure ε-equilibrium whenever δ(G) ≤ ε/2n.
pub fn two_step_construction(g: &Game, a0: &PureProfile) -> PureProfile {
    PureProfile(
        (0..g.num_players())
            .map(|i| best_response(g, i, &a0.0))
            .collect(),
    )
}

/// The E-test statistic for one event: `|f_i(h, a_{−i}) − E_μ f_i(h, ·)|`.
pub fn payoff_deviation(
    g: &Game,
    mu: &MixedProfile,
    a: &PureProfile,
    i: usize,
    h: usize,
    mode: ExpectationMode,
) -> Result<f64> {
    g.validate_profile(&a.0)?;
    let expect = expected_payoffs_player(g, i, mu, mode)?;
    let realized = g.deviation_row(i, &a.0)[h];
    Ok((realized - expect[h].value).abs())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfPurifyOutcome {
    /// First sampled profile (lowest try index) passing every E-test.
    pub profile: Option<PureProfile>,
    /// Tries consumed (= winning try + 1, or max_tries when none passed).
    pub tries: u64,
    /// Best (smallest) max-deviation seen across tries — the diagnostic when
    /// no sample passes.
    pub worst_deviation: f64,
    /// On success: whether the profile also passes the full ε-equilibrium
    /// check (guaranteed when μ is an exact Nash equilibrium).
    pub is_equilibrium: Option<bool>,
    /// On success: the support-optimality slack
    /// `max_i (max_d E_i[d] − E_i[a_i])`; ≈ 0 exactly when μ is Nash, which
    /// is what turns E-test membership into the ε-equilibrium chain.
    pub chain_slack: Option<f64>,
    /// True when expectations had to be Monte-Carlo frozen instead of exact.
    pub expectations_estimated: bool,
}

/// Freeze the expectation table `E_i[h]`, exactly when the budget allows and
/// otherwise once by Monte Carlo (so the E-test stays deterministic per run).
fn frozen_expectations(
    g: &Game,
    mu: &MixedProfile,
    seed: u64,
    budget: Budget,
) -> Result<(Vec<Vec<Estimate>>, bool)> {
    let n = g.num_players();
    let mut estimated = false;
    let mut table = Vec::with_capacity(n);
    for i in 0..n {
        match expected_payoffs_player(g, i, mu, ExpectationMode::Exact { budget }) {
            Ok(row) => table.push(row),
            Err(Error::BudgetExceeded { .. }) => {
                estimated = true;
                table.push(expected_payoffs_player(
                    g,
                    i,
                    mu,
                    ExpectationMode::MonteCarlo {
                        samples: 100_000,
                        seed: crate::rng::derive_seed(seed, u64::MAX - 1),
                    },
                )?);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((table, estimated))
}

/// Sample profiles from `mu` until one lies in every event E_{i,h}, i.e.
/// every realized deviation payoff is within ε/2 of its expectation.
///
/// Tries run in parallel under derived sub-seeds; the winner is the lowest
/// passing try index, so results are independent of thread count.
pub fn self_purify(
    g: &Game,
    mu: &MixedProfile,
    eps: f64,
    max_tries: u64,
    seed: u64,
    budget: Budget,
) -> Result<SelfPurifyOutcome> {
    mu.validate(g)?;
    if !(eps >= 0.0) {
        return Err(Error::Domain("eps must be nonnegative".into()));
    }
    let (expect, expectations_estimated) = frozen_expectations(g, mu, seed, budget)?;
    let n = g.num_players();
    let threshold = eps / 2.0 + DEFAULT_TOL;
    let max_tries = max_tries.max(1);

    let best_try = AtomicU64::new(u64::MAX);
    let worst_of = |a: &[usize]| -> f64 {
        let table = g.deviation_table(a);
        let mut worst = 0.0f64;
        for i in 0..n {
            for (h, &v) in table[i].iter().enumerate() {
                worst = worst.max((v - expect[i][h].value).abs());
            }
        }
        worst
    };
    let (first, min_worst) = crate::game_core::chunk_ranges(
        max_tries as u128,
        8 * rayon::current_num_threads(),
    )
    .into_par_iter()
    .map(|(lo, hi)| {
        let mut local_first: Option<u64> = None;
        let mut local_min = f64::INFINITY;
        for t in lo as u64..hi as u64 {
            if best_try.load(Ordering::Relaxed) < lo as u64 {
                break; // an earlier chunk already produced the winner
            }
            let mut rng = sub_rng(seed, t);
            let a = mu.sample(&mut rng);
            let w = worst_of(&a);
            local_min = local_min.min(w);
            if w <= threshold {
                local_first = Some(t);
                best_try.fetch_min(t, Ordering::Relaxed);
                break;
            }
        }
        (local_first, local_min)
    })
    .reduce(
        || (None, f64::INFINITY),
        |(f1, w1), (f2, w2)| {
            let first = match (f1, f2) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            (first, w1.min(w2))
        },
    );

    match first {
        Some(t) => {
            let mut rng = sub_rng(seed, t);
            let a = PureProfile(mu.sample(&mut rng));
            let is_eq = is_pure_eps_equilibrium(g, &a, eps, DEFAULT_TOL);
            let chain_slack = (0..n)
                .map(|i| {
                    let best = expect[i]
                        .iter()
                        .map(|e| e.value)
                        .fold(f64::NEG_INFINITY, f64::max);
                    best - expect[i][a.0[i]].value
                })
                .fold(0.0f64, f64::max);
            Ok(SelfPurifyOutcome {
                worst_deviation: worst_of(&a.0),
                profile: Some(a),
                tries: t + 1,
                is_equilibrium: Some(is_eq),
                chain_slack: Some(chain_slack),
                expectations_estimated,
            })
        }
        None => Ok(SelfPurifyOutcome {
            profile: None,
            tries: max_tries,
            worst_deviation: min_worst,
            is_equilibrium: None,
            chain_slack: None,
            expectations_estimated,
        }),
    }
}

/// Fraction of `samples` raw draws from `mu` that are full pure
/// ε-equilibria (the quantity the certificate lower-bounds when `mu` is an
/// exact Nash equilibrium).
pub fn purification_rate(g: &Game, mu: &MixedProfile, eps: f64, samples: u64, seed: u64) -> Result<f64> {
    mu.validate(g)?;
    let n = g.num_players();
    let samples = samples.max(1);
    let passes: u64 = crate::game_core::chunk_ranges(
        samples as u128,
        8 * rayon::current_num_threads(),
    )
    .into_par_iter()
    .map(|(lo, hi)| {
        let mut local = 0u64;
        for t in lo as u64..hi as u64 {
            let mut rng = sub_rng(seed, t);
            let a = mu.sample(&mut rng);
            let table = g.deviation_table(&a);
            let ok = (0..n).all(|i| {
                let row = &table[i];
                let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                best - row[a[i]] <= eps + DEFAULT_TOL
            });
            if ok {
                local += 1;
            }
        }
        local
    })
    .sum();
    Ok(passes as f64 / samples as f64)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailCheck {
    /// Empirical frequency of `{F ≥ mean + r}`.
    pub empirical: f64,
    /// `exp(−r² / (2·n·δ_f²))`, doubled for the two-sided variant.
    pub bound: f64,
    /// The mean used (exact if supplied, else an independent estimate).
    pub mean: f64,
}

/// Empirical check of the concentration bound for a function `f` on profiles
/// with declared per-coordinate Lipschitz bound `delta_f`.
pub fn concentration_tail_check<F>(
    f: F,
    mu: &MixedProfile,
    delta_f: f64,
    r: f64,
    samples: u64,
    seed: u64,
    exact_mean: Option<f64>,
    two_sided: bool,
) -> TailCheck
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let n = mu.distributions.len();
    let samples = samples.max(1);
    let mean = exact_mean.unwrap_or_else(|| {
        let total: f64 = crate::game_core::chunk_ranges(
            samples as u128,
            8 * rayon::current_num_threads(),
        )
        .into_par_iter()
        .enumerate()
        .map(|(w, (lo, hi))| {
            // Independent stream (offset keeps it disjoint from the tail pass).
            let mut rng = sub_rng(crate::rng::derive_seed(seed, u64::MAX), w as u64);
            let mut acc = 0.0;
            for _ in lo..hi {
                acc += f(&mu.sample(&mut rng));
            }
            acc
        })
        .sum();
        total / samples as f64
    });
    let hits: u64 = crate::game_core::chunk_ranges(samples as u128, 8 * rayon::current_num_threads())
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut local = 0u64;
            for t in lo as u64..hi as u64 {
                let mut rng = sub_rng(seed, t);
                let v = f(&mu.sample(&mut rng));
                let exceed = if two_sided {
                    (v - mean).abs() >= r
                } else {
                    v - mean >= r
                };
                if exceed {
                    local += 1;
                }
            }
            local
        })
        .sum();
    let mut bound = (-r * r / (2.0 * n as f64 * delta_f * delta_f)).exp();
    if two_sided {
        bound = (2.0 * bound).min(1.0);
    }
    TailCheck {
        empirical: hits as f64 / samples as f64,
        bound: bound.min(1.0),
        mean,
    }
}

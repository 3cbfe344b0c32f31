use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::game::{
    advance_profile, check_budget, profile_count, profile_from_rank, Budget, Game, Payoffs,
    PureProfile,
};
use crate::rng::sub_rng;

/// Hamming distance between two profiles of the same shape.
pub fn hamming(a: &PureProfile, b: &PureProfile) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "profiles of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count())
}

/// Split `0..total` into at most `target` contiguous ranges.
pub(crate) fn chunk_ranges(total: u128, target: usize) -> Vec<(u128, u128)> {
    if total == 0 {
        return Vec::new();
    }
    let chunks = (target.max(1) as u128).min(total);
    let base = total / chunks;
    let extra = total % chunks;
    let mut out = Vec::with_capacity(chunks as usize);
    let mut lo = 0u128;
    for c in 0..chunks {
        let len = base + if c < extra { 1 } else { 0 };
        out.push((lo, lo + len));
        lo += len;
    }
    out
}

/// Max of a per-profile statistic over all profiles, deterministically
/// parallel (chunked ranges; max is order-independent).
fn par_max_over_profiles<F>(counts: &[usize], eval: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let total = profile_count(counts);
    chunk_ranges(total, 8 * rayon::current_num_threads())
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut a = profile_from_rank(counts, lo);
            let mut best = f64::NEG_INFINITY;
            for _ in lo..hi {
                best = best.max(eval(&a));
                advance_profile(counts, &mut a);
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

fn lipschitz_cells(g: &Game) -> u128 {
    let counts = g.strategy_counts();
    let n = counts.len() as u128;
    let flips: u128 = counts.iter().map(|&m| (m - 1) as u128).sum();
    profile_count(counts).saturating_mul(n + flips * (n - 1))
}

/// The Lipschitz constant δ(G): the exact maximum over profiles `a`, players
/// `i`, opponents `j ≠ i`, and alternate strategies of `j`, of
/// |f_i(a) − f_i(a with j's strategy replaced)|.
pub fn lipschitz_constant_exact(g: &Game, budget: Budget) -> Result<f64> {
    let counts = g.strategy_counts().to_vec();
    let n = counts.len();
    if n < 2 {
        return Ok(0.0);
    }
    check_budget(lipschitz_cells(g), budget)?;
    Ok(par_max_over_profiles(&counts, |a| {
        let base: Vec<f64> = (0..n).map(|i| g.payoff(i, a)).collect();
        let mut b = a.to_vec();
        let mut best = 0.0f64;
        for j in 0..n {
            // Unordered flip pairs only: |·| is symmetric in (a_j, s').
            for sp in a[j] + 1..counts[j] {
                b[j] = sp;
                for i in 0..n {
                    if i != j {
                        best = best.max((g.payoff(i, &b) - base[i]).abs());
                    }
                }
            }
            b[j] = a[j];
        }
        best
    }))
}

/// Sampled lower bound on δ(G): max over `samples` random (profile, player,
/// opponent-flip) tuples. Always ≤ the exact constant.
pub fn lipschitz_constant_estimate(g: &Game, samples: u64, seed: u64) -> f64 {
    use rand::Rng as _;
    let counts = g.strategy_counts().to_vec();
    let n = counts.len();
    if n < 2 || samples == 0 {
        return 0.0;
    }
    let workers = chunk_ranges(samples as u128, 8 * rayon::current_num_threads());
    workers
        .into_par_iter()
        .enumerate()
        .map(|(w, (lo, hi))| {
            let mut rng = sub_rng(seed, w as u64);
            let mut best = 0.0f64;
            for _ in lo..hi {
                let a: Vec<usize> = counts.iter().map(|&m| rng.gen_range(0..m)).collect();
                let i = rng.gen_range(0..n);
                let j = {
                    let mut j = rng.gen_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    j
                };
                if counts[j] < 2 {
                    continue;
                }
                let sp = {
                    let mut s = rng.gen_range(0..counts[j] - 1);
                    if s >= a[j] {
                        s += 1;
                    }
                    s
                };
                let mut b = a.clone();
                b[j] = sp;
                best = best.max((g.payoff(i, &b) - g.payoff(i, &a)).abs());
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// η(G): the exact maximum over single-opponent flips of the change in a
/// player's payoff *difference* between any two of her own strategies.
pub fn eta_constant_exact(g: &Game, budget: Budget) -> Result<f64> {
    let counts = g.strategy_counts().to_vec();
    let n = counts.len();
    if n < 2 {
        return Ok(0.0);
    }
    // Two deviation rows per (profile with a_i = 0, flip, player i).
    let flips: u128 = counts.iter().map(|&m| (m - 1) as u128).sum();
    let required = profile_count(&counts).saturating_mul(2 * flips * (n as u128 - 1));
    check_budget(required, budget)?;
    Ok(par_max_over_profiles(&counts, |a| {
        let mut b = a.to_vec();
        let mut best = 0.0f64;
        for j in 0..n {
            for sp in a[j] + 1..counts[j] {
                b[j] = sp;
                for i in 0..n {
                    // The difference f_i(p,·) − f_i(q,·) does not depend on
                    // a_i, so evaluate each opponent configuration once.
                    if i == j || a[i] != 0 {
                        continue;
                    }
                    let va = g.deviation_row(i, a);
                    let vb = g.deviation_row(i, &b);
                    for p in 0..counts[i] {
                        for q in p + 1..counts[i] {
                            let d = (va[p] - va[q]) - (vb[p] - vb[q]);
                            best = best.max(d.abs());
                        }
                    }
                }
            }
            b[j] = a[j];
        }
        best
    }))
}

/// The η-reduction G′ with payoffs `g_i(a) = f_i(a) − f_i(anchor_i, a_{−i})`.
///
/// δ(G′) ≤ η(G), and G′ has exactly the same deviation gains as G, hence the
/// same pure ε-equilibria. Materialized as an explicit table when it fits
/// `budget`, otherwise returned as a lazy wrapper over `g`.
pub fn eta_reduction(g: &Arc<Game>, anchors: &[usize], budget: Budget) -> Result<Game> {
    let counts = g.strategy_counts().to_vec();
    let n = counts.len();
    if anchors.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "expected {n} anchors, got {}",
            anchors.len()
        )));
    }
    for (i, (&s, &m)) in anchors.iter().zip(&counts).enumerate() {
        if s >= m {
            return Err(Error::InvalidStrategy {
                player: i,
                strategy: s,
                count: m,
            });
        }
    }
    let total = profile_count(&counts);
    if total.saturating_mul(n as u128) <= budget as u128 {
        let per = total as usize;
        let mut tables = vec![vec![0.0; per]; n];
        let mut a = vec![0usize; n];
        let mut b = vec![0usize; n];
        let mut rank = 0usize;
        loop {
            b.copy_from_slice(&a);
            for i in 0..n {
                b[i] = anchors[i];
                tables[i][rank] = g.payoff(i, &a) - g.payoff(i, &b);
                b[i] = a[i];
            }
            rank += 1;
            if !advance_profile(&counts, &mut a) {
                break;
            }
        }
        Game::explicit(counts, tables, budget)
    } else {
        Ok(Game::from_parts(
            counts,
            g.kind(),
            Payoffs::Reduced {
                base: Arc::clone(g),
                anchors: anchors.to_vec(),
            },
            None,
        ))
    }
}

/// Player `i`'s regret at `a`: max over own deviations of the payoff gain.
pub fn regret(g: &Game, i: usize, a: &[usize]) -> f64 {
    let row = g.deviation_row(i, a);
    let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (best - row[a[i]]).max(0.0)
}

/// True iff every player's regret at `a` is at most `eps + tol`.
pub fn is_pure_eps_equilibrium(g: &Game, a: &PureProfile, eps: f64, tol: f64) -> bool {
    (0..g.num_players()).all(|i| regret(g, i, &a.0) <= eps + tol)
}

/// Best response of player `i` to `a_{−i}`; ties break to the lowest index.
pub fn best_response(g: &Game, i: usize, a: &[usize]) -> usize {
    let row = g.deviation_row(i, a);
    let mut best = 0usize;
    for (d, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = d;
        }
    }
    best
}

/// Result of an exhaustive pure ε-equilibrium scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Lexicographically first ε-equilibrium, if any.
    pub first: Option<PureProfile>,
    /// Total number of pure ε-equilibria.
    pub count: u128,
}

/// Scan all profiles in lexicographic order for pure ε-equilibria.
pub fn exhaustive_pure_search(
    g: &Game,
    eps: f64,
    tol: f64,
    budget: Budget,
) -> Result<SearchOutcome> {
    let counts = g.strategy_counts().to_vec();
    let n = counts.len();
    let total = profile_count(&counts);
    let cells_per_profile: u128 = counts.iter().map(|&m| m as u128).sum();
    check_budget(total.saturating_mul(cells_per_profile), budget)?;
    let (count, first_rank) = chunk_ranges(total, 8 * rayon::current_num_threads())
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut a = profile_from_rank(&counts, lo);
            let mut count = 0u128;
            let mut first: Option<u128> = None;
            for rank in lo..hi {
                let ok = (0..n).all(|i| regret(g, i, &a) <= eps + tol);
                if ok {
                    count += 1;
                    if first.is_none() {
                        first = Some(rank);
                    }
                }
                advance_profile(&counts, &mut a);
            }
            (count, first)
        })
        .reduce(
            || (0u128, None),
            |(c1, f1), (c2, f2)| {
                let first = match (f1, f2) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                (c1 + c2, first)
            },
        );
    Ok(SearchOutcome {
        first: first_rank.map(|r| PureProfile(profile_from_rank(&counts, r))),
        count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsStatus {
    Converged,
    Cycled,
    Budget,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DynamicsOutcome {
    pub profile: PureProfile,
    pub status: DynamicsStatus,
    pub rounds: usize,
}

/// Round-robin best-response dynamics from `a0` for at most `max_iters`
/// rounds. The update order is fixed (player 0 first), so the trajectory is
/// deterministic; `seed` is accepted for interface uniformity and unused.
pub fn best_response_dynamics(
    g: &Game,
    a0: &PureProfile,
    max_iters: usize,
    _seed: u64,
) -> DynamicsOutcome {
    let n = g.num_players();
    let mut a = a0.0.clone();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(a.clone());
    for round in 0..max_iters {
        let mut changed = false;
        for i in 0..n {
            let b = best_response(g, i, &a);
            if b != a[i] {
                a[i] = b;
                changed = true;
            }
        }
        if !changed {
            return DynamicsOutcome {
                profile: PureProfile(a),
                status: DynamicsStatus::Converged,
                rounds: round + 1,
            };
        }
        if !seen.insert(a.clone()) {
            return DynamicsOutcome {
                profile: PureProfile(a),
                status: DynamicsStatus::Cycled,
                rounds: round + 1,
            };
        }
    }
    DynamicsOutcome {
        profile: PureProfile(a),
        status: DynamicsStatus::Budget,
        rounds: max_iters,
    }
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(what.into()))
    }
}

/// Threshold ε/2n under which two-step best response yields a pure
/// ε-equilibrium.
pub fn delta_trivial(eps: f64, n: usize) -> Result<f64> {
    require(eps > 0.0, "eps must be positive")?;
    require(n >= 2, "n must be at least 2")?;
    Ok(eps / (2.0 * n as f64))
}

/// Threshold ε/√(8n·ln(2mn)) under which pure ε-equilibria exist.
pub fn delta_main(eps: f64, m: usize, n: usize) -> Result<f64> {
    require(eps > 0.0, "eps must be positive")?;
    require(n >= 2, "n must be at least 2")?;
    require(m >= 1, "m must be at least 1")?;
    Ok(eps / (8.0 * n as f64 * (2.0 * m as f64 * n as f64).ln()).sqrt())
}

/// Threshold ε/2m for anonymous games.
pub fn delta_anonymous(eps: f64, m: usize) -> Result<f64> {
    require(eps > 0.0, "eps must be positive")?;
    require(m >= 1, "m must be at least 1")?;
    Ok(eps / (2.0 * m as f64))
}

//! Equilibrium solver for the auxiliary continuous game.
//!
//! Three stages, cheapest first:
//! 1. an exact scan for pure equilibria over aggregate count vectors
//!    (feasibility by bipartite matching), which yields slack exactly 0;
//! 2. damped simultaneous best response (fictitious-play weights) with
//!    periodically snapped candidate points;
//! 3. a Newton polish on the candidate's support, solving the linearized
//!    indifference system, which drives mixed solutions to ~machine slack.
//!
//! Convergence is not guaranteed; the best iterate and its slack are always
//! returned and the caller re-checks the final regret bound.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::anonymous::{AnonymousGame, DistIndex};
use crate::error::Result;
use crate::linalg;
use crate::rng::sub_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    PureScan,
    FictitiousPlay,
    NewtonPolish,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuxiliarySolution {
    /// One mass-1 simplex point per player.
    pub points: Vec<Vec<f64>>,
    /// Max over players and supported strategies of the optimality gap of
    /// the extended payoff (the support-condition residual).
    pub slack: f64,
    pub converged: bool,
    pub path: SolverPath,
}

/// Support-condition slack of `points` at support threshold `tol`.
pub fn support_slack(g: &AnonymousGame, points: &[Vec<f64>], tol: f64) -> f64 {
    let n = g.n();
    let m = g.m();
    let mut total = vec![0.0f64; m];
    for p in points {
        for t in 0..m {
            total[t] += p[t];
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        let x: Vec<f64> = (0..m).map(|t| (total[t] - points[i][t]).max(0.0)).collect();
        let row = g.extension_row(i, &x);
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for s in 0..m {
            if points[i][s] > tol {
                worst = worst.max(best - row[s]);
            }
        }
    }
    worst
}

/// Kuhn-style bipartite assignment: place each player on an allowed strategy
/// without exceeding the per-strategy capacities. Deterministic (players and
/// strategies in ascending order).
fn assign_players(allowed: &[Vec<bool>], caps: &[u32]) -> Option<Vec<usize>> {
    let n = allowed.len();
    let m = caps.len();
    let mut load = vec![0u32; m];
    let mut assignment = vec![usize::MAX; n];

    fn try_place(
        i: usize,
        allowed: &[Vec<bool>],
        caps: &[u32],
        load: &mut [u32],
        assignment: &mut [usize],
        visited: &mut [bool],
    ) -> bool {
        for s in 0..caps.len() {
            if !allowed[i][s] || visited[s] {
                continue;
            }
            visited[s] = true;
            if load[s] < caps[s] {
                assignment[i] = s;
                load[s] += 1;
                return true;
            }
            // Try to evict someone currently on s to another strategy.
            for j in 0..allowed.len() {
                if assignment[j] == s {
                    assignment[j] = usize::MAX;
                    load[s] -= 1;
                    if try_place(j, allowed, caps, load, assignment, visited) {
                        assignment[i] = s;
                        load[s] += 1;
                        return true;
                    }
                    assignment[j] = s;
                    load[s] += 1;
                }
            }
        }
        false
    }

    for i in 0..n {
        let mut visited = vec![false; m];
        if !try_place(i, allowed, caps, &mut load, &mut assignment, &mut visited) {
            return None;
        }
    }
    Some(assignment)
}

/// Exact pure-equilibrium scan: for each aggregate `c ∈ D_n(S)`, a player on
/// strategy `s` faces opponents `c − 1^s`; she is best responding iff `s`
/// maximizes her table row there. Feasibility of filling `c` with only
/// best-response strategies is a capacitated matching.
fn pure_scan(g: &AnonymousGame) -> Option<Vec<Vec<f64>>> {
    let n = g.n();
    let m = g.m();
    let aggregates = DistIndex::new(n as u32, m);
    for c in aggregates.iter() {
        let mut allowed = vec![vec![false; m]; n];
        let mut any_empty = false;
        for i in 0..n {
            let mut any = false;
            for s in 0..m {
                if c[s] == 0 {
                    continue;
                }
                let mut opp = c.clone();
                opp[s] -= 1;
                let rank = g.dists().rank(&opp).unwrap();
                let mine = g.payoff_by_rank(i, s, rank);
                let best = (0..m)
                    .map(|d| g.payoff_by_rank(i, d, rank))
                    .fold(f64::NEG_INFINITY, f64::max);
                if mine >= best {
                    allowed[i][s] = true;
                    any = true;
                }
            }
            if !any {
                any_empty = true;
                break;
            }
        }
        if any_empty {
            continue;
        }
        if let Some(assignment) = assign_players(&allowed, c) {
            let points = assignment
                .into_iter()
                .map(|s| {
                    let mut v = vec![0.0; m];
                    v[s] = 1.0;
                    v
                })
                .collect();
            return Some(points);
        }
    }
    None
}

fn renormalize(p: &mut [f64]) {
    for v in p.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = p.iter().sum();
    if sum > 0.0 {
        for v in p.iter_mut() {
            *v /= sum;
        }
    } else {
        p[0] = 1.0;
        for v in p.iter_mut().skip(1) {
            *v = 0.0;
        }
    }
}

/// Snap near-optimal support: zero every strategy whose extended-payoff gap
/// exceeds `kappa`, then renormalize.
fn snapped_candidate(g: &AnonymousGame, points: &[Vec<f64>], kappa: f64) -> Vec<Vec<f64>> {
    let n = g.n();
    let m = g.m();
    let mut total = vec![0.0f64; m];
    for p in points {
        for t in 0..m {
            total[t] += p[t];
        }
    }
    let mut out = points.to_vec();
    for i in 0..n {
        let x: Vec<f64> = (0..m).map(|t| (total[t] - points[i][t]).max(0.0)).collect();
        let row = g.extension_row(i, &x);
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut kept = false;
        for s in 0..m {
            if best - row[s] > kappa {
                out[i][s] = 0.0;
            } else if out[i][s] > 0.0 {
                kept = true;
            }
        }
        if !kept {
            // Everything snapped away: fall back to the best response.
            let arg = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(s, _)| s)
                .unwrap();
            out[i] = vec![0.0; m];
            out[i][arg] = 1.0;
        } else {
            renormalize(&mut out[i]);
        }
    }
    out
}

/// One pass of the linearized indifference polish on the current supports.
/// Returns the improved points, or None when the system is singular.
fn newton_step(g: &AnonymousGame, points: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = g.n();
    let m = g.m();
    let supports: Vec<Vec<usize>> = points
        .iter()
        .map(|p| (0..m).filter(|&s| p[s] > 1e-12).collect())
        .collect();
    // Unknowns: Δp_i[s] for every player with a non-degenerate support.
    let vars: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| {
            if supports[i].len() >= 2 {
                supports[i].iter().map(|&s| (i, s)).collect::<Vec<_>>()
            } else {
                Vec::new()
            }
        })
        .collect();
    if vars.is_empty() {
        return None;
    }
    let var_index = |i: usize, s: usize| vars.iter().position(|&(a, b)| (a, b) == (i, s));

    let mut total = vec![0.0f64; m];
    for p in points {
        for t in 0..m {
            total[t] += p[t];
        }
    }
    // Values and subgradients at the current point, per (player, strategy).
    let mut vals = vec![vec![0.0f64; m]; n];
    let mut grads = vec![vec![vec![0.0f64; m]; m]; n];
    for i in 0..n {
        let x: Vec<f64> = (0..m).map(|t| (total[t] - points[i][t]).max(0.0)).collect();
        for s in 0..m {
            let (v, gr) = g.extension_value_grad(i, s, &x);
            vals[i][s] = v;
            grads[i][s] = gr;
        }
    }

    let dim = vars.len();
    let mut a = vec![vec![0.0f64; dim]; dim];
    let mut rhs = vec![0.0f64; dim];
    let mut row = 0;
    for i in 0..n {
        if supports[i].len() < 2 {
            continue;
        }
        let s0 = supports[i][0];
        for &s in &supports[i][1..] {
            for (col, &(j, t)) in vars.iter().enumerate() {
                if j == i {
                    continue; // own mixture does not enter x_{−i}
                }
                a[row][col] = grads[i][s][t] - grads[i][s0][t];
            }
            rhs[row] = vals[i][s0] - vals[i][s];
            row += 1;
        }
        // Mass conservation: Σ Δp_i = 0.
        for &s in &supports[i] {
            a[row][var_index(i, s).unwrap()] = 1.0;
        }
        rhs[row] = 0.0;
        row += 1;
    }
    debug_assert_eq!(row, dim);

    let delta = linalg::solve(&a, &rhs)?;
    // Largest step in (0, 1] keeping every coordinate nonnegative.
    let mut alpha = 1.0f64;
    for (idx, &(i, s)) in vars.iter().enumerate() {
        if delta[idx] < 0.0 {
            alpha = alpha.min(-points[i][s] / delta[idx]);
        }
    }
    if !(alpha > 0.0) {
        return None;
    }
    let mut out = points.to_vec();
    for (idx, &(i, s)) in vars.iter().enumerate() {
        out[i][s] += alpha * delta[idx];
    }
    for p in &mut out {
        renormalize(p);
    }
    Some(out)
}

/// Solve the auxiliary game for an (approximate) equilibrium p̄ satisfying
/// the support condition up to the reported slack.
pub fn solve_auxiliary(
    g: &AnonymousGame,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<AuxiliarySolution> {
    let n = g.n();
    let m = g.m();

    if let Some(points) = pure_scan(g) {
        let slack = support_slack(g, &points, tol);
        return Ok(AuxiliarySolution {
            converged: slack <= tol,
            points,
            slack,
            path: SolverPath::PureScan,
        });
    }

    type Candidate = (Vec<Vec<f64>>, f64, SolverPath);
    let mut best: Option<Candidate> = None;
    let consider = |points: Vec<Vec<f64>>, path: SolverPath, best: &mut Option<Candidate>| {
        let slack = support_slack(g, &points, tol);
        match best {
            Some((_, s, _)) if *s <= slack => {}
            _ => *best = Some((points, slack, path)),
        }
    };

    let restarts = 3usize;
    for restart in 0..restarts {
        let mut p: Vec<Vec<f64>> = if restart == 0 {
            vec![vec![1.0 / m as f64; m]; n]
        } else {
            let mut rng = sub_rng(seed, restart as u64);
            (0..n)
                .map(|_| {
                    let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05f64..1.0)).collect();
                    renormalize(&mut v);
                    v
                })
                .collect()
        };
        for t in 0..max_iters.max(1) {
            let gamma = 1.0 / (t as f64 + 2.0);
            let mut total = vec![0.0f64; m];
            for pi in &p {
                for s in 0..m {
                    total[s] += pi[s];
                }
            }
            for i in 0..n {
                let x: Vec<f64> = (0..m).map(|s| (total[s] - p[i][s]).max(0.0)).collect();
                let row = g.extension_row(i, &x);
                let arg = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                    .map(|(s, _)| s)
                    .unwrap();
                for s in 0..m {
                    let target = if s == arg { 1.0 } else { 0.0 };
                    p[i][s] = (1.0 - gamma) * p[i][s] + gamma * target;
                }
            }
            if t % 25 == 24 || t + 1 == max_iters {
                for kappa in [1e-9, 1e-4, 1e-2] {
                    consider(
                        snapped_candidate(g, &p, kappa),
                        SolverPath::FictitiousPlay,
                        &mut best,
                    );
                }
                consider(p.clone(), SolverPath::FictitiousPlay, &mut best);
                if best.as_ref().map(|(_, s, _)| *s <= tol).unwrap_or(false) {
                    break;
                }
            }
        }
        if best.as_ref().map(|(_, s, _)| *s <= tol).unwrap_or(false) {
            break;
        }
    }

    let (mut points, mut slack, mut path) = best.expect("at least one candidate");
    // Newton polish from the best candidate.
    let mut current = points.clone();
    for _ in 0..25 {
        match newton_step(g, &current) {
            Some(next) => {
                let s = support_slack(g, &next, tol);
                if s < slack {
                    points = next.clone();
                    slack = s;
                    path = SolverPath::NewtonPolish;
                }
                if s <= tol / 10.0 {
                    break;
                }
                current = next;
            }
            None => break,
        }
    }

    Ok(AuxiliarySolution {
        converged: slack <= tol,
        points,
        slack,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymous::{random_anonymous, AnonymousGame};
    use crate::DEFAULT_BUDGET;

    fn dominant_game() -> AnonymousGame {
        // Strategy 0 beats strategy 1 by 0.05 at every distribution;
        // F is constant in the distribution, so delta = 0.1 is respected.
        let n = 4;
        let dist_len = 4; // mass 3, m = 2
        let mut f = Vec::new();
        for _i in 0..n {
            f.extend(std::iter::repeat(0.9).take(dist_len)); // strategy 0
            f.extend(std::iter::repeat(0.85).take(dist_len)); // strategy 1
        }
        AnonymousGame::new(n, 2, 0.1, f, DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn dominant_strategy_is_found_pure_with_zero_slack() {
        let g = dominant_game();
        let out = solve_auxiliary(&g, 1e-9, 200, 0).unwrap();
        assert_eq!(out.path, SolverPath::PureScan);
        assert_eq!(out.slack, 0.0);
        for p in &out.points {
            assert_eq!(p, &vec![1.0, 0.0]);
        }
    }

    fn crossing_congestion(n: usize, delta: f64) -> AnonymousGame {
        // Symmetric 2-strategy congestion: each strategy's payoff decreases
        // in its own usage, forcing an interior symmetric equilibrium.
        let dist_len = n; // mass n−1
        let mut f = Vec::new();
        for _i in 0..n {
            // Strategy 0: payoff falls as more opponents play 0.
            for rank in 0..dist_len {
                let others_on_zero = (n - 1 - rank) as f64;
                f.push(1.0 - delta * others_on_zero);
            }
            // Strategy 1: payoff falls as more opponents play 1 — with an
            // asymmetric offset so the crossing is interior but not at 1/2.
            for rank in 0..dist_len {
                f.push(0.97 - delta * rank as f64);
            }
        }
        AnonymousGame::new(n, 2, delta, f, DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn congestion_equilibrium_matches_bisection_oracle() {
        let n = 7;
        let delta = 0.05;
        let g = crossing_congestion(n, delta);
        let out = solve_auxiliary(&g, 1e-7, 400, 1).unwrap();
        assert!(out.converged, "slack {}", out.slack);

        // 1-D oracle: in a symmetric profile q (probability of strategy 0),
        // the extended payoffs cross where ext0(q) = ext1(q); bisect on q.
        let sym_gap = |q: f64| {
            let x = [q * (n as f64 - 1.0), (1.0 - q) * (n as f64 - 1.0)];
            g.extension(0, 0, &x) - g.extension(0, 1, &x)
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        assert!(sym_gap(lo) > 0.0 && sym_gap(hi) < 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if sym_gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q_star = 0.5 * (lo + hi);
        // Congestion games admit pure equilibria, so the pure scan may win
        // with an aggregate quantized to multiples of 1/n around the
        // continuous crossing point.
        let agg0: f64 = out.points.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        assert!(
            (agg0 - q_star).abs() <= 1.0 / n as f64,
            "aggregate {agg0} vs oracle {q_star}"
        );
    }

    #[test]
    fn matching_pennies_mixes_at_one_half() {
        // Anonymous 2-player matching pennies: player 0 wants to match,
        // player 1 wants to mismatch. No pure equilibrium, so the mixed
        // path must run; the unique equilibrium is (1/2, 1/2) for both.
        let delta = 0.2;
        // Ranks for mass 1, m = 2: (1,0) then (0,1).
        let f = vec![
            // player 0: s=0 over ranks, s=1 over ranks
            delta / 2.0, -delta / 2.0, -delta / 2.0, delta / 2.0,
            // player 1 (payoffs negated)
            -delta / 2.0, delta / 2.0, delta / 2.0, -delta / 2.0,
        ];
        let g = AnonymousGame::new(2, 2, delta, f, DEFAULT_BUDGET).unwrap();
        let out = solve_auxiliary(&g, 1e-7, 400, 0).unwrap();
        assert!(out.converged, "slack {}", out.slack);
        assert_ne!(out.path, SolverPath::PureScan);
        for p in &out.points {
            assert!((p[0] - 0.5).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn random_games_mostly_converge() {
        let mut failures = 0;
        for seed in 0..10 {
            let g = random_anonymous(8, 2, 0.05, seed).unwrap();
            let out = solve_auxiliary(&g, 1e-6, 300, seed).unwrap();
            if !out.converged {
                failures += 1;
            }
            for p in &out.points {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(p.iter().all(|&w| w >= 0.0));
            }
        }
        assert!(failures <= 1, "{failures}/10 failed to converge");
    }

    #[test]
    fn solver_is_deterministic() {
        let g = random_anonymous(6, 3, 0.05, 2).unwrap();
        let a = solve_auxiliary(&g, 1e-6, 200, 9).unwrap();
        let b = solve_auxiliary(&g, 1e-6, 200, 9).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.slack.to_bits(), b.slack.to_bits());
    }
}

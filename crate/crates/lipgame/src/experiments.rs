//! The acceptance-experiment harness: ten numbered criteria and the named
//! presets that group them, shared by the CLI `experiment` subcommand and
//! the acceptance test suite.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::anonymous::{binomial, random_anonymous};
use crate::counterexamples::{
    build_gb_game, build_mass_mp_game, build_restaurant_game, find_gb_matrix,
    purification_failure_experiment, restaurant_home_payoff, verify_discrepancy, DiscrepancyMode,
    SignMatrix,
};
use crate::error::{Error, Result};
use crate::game_core::{
    advance_profile, delta_main, delta_trivial, exhaustive_pure_search, is_pure_eps_equilibrium,
    lipschitz_constant_exact, mixed_regret, polymatrix_mixed_nash, polymatrix_random, Budget,
    ExpectationMode, Game, GameKind, MixedProfile, PureProfile,
};
use crate::purification::{
    certificate, concentration_tail_check, purification_rate, two_step_construction,
};
use crate::replication::{
    nash_via_replication, replicate, replication_lipschitz_check, ReplicationMethod,
};
use crate::rng::derive_seed;
use crate::DEFAULT_TOL;

/// Default enumeration budget for the experiment harness; criterion 6 alone
/// needs ~1.3e7 cells at k = 3.
pub const EXPERIMENT_BUDGET: Budget = 100_000_000;

/// 2×2 matching pennies with ±1 payoffs, the canonical replication base.
fn matching_pennies() -> Game {
    let t0 = vec![1.0, -1.0, -1.0, 1.0];
    let t1: Vec<f64> = t0.iter().map(|x| -x).collect();
    Game::explicit(vec![2, 2], vec![t0, t1], crate::DEFAULT_BUDGET).unwrap()
}

/// Outcome of one experiment criterion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub pass: bool,
    pub details: Value,
}

impl CriterionResult {
    /// The one-line summary printed by the CLI and the acceptance test.
    pub fn summary_line(&self) -> String {
        format!(
            "{}: {}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Criterion 1: the two-step construction yields a pure 0.3-equilibrium for
/// 100 seeded polymatrix games at the trivial threshold, within 5 s.
pub fn criterion_prop1_construction(seed: u64, _budget: Budget) -> CriterionResult {
    let start = Instant::now();
    let eps = 0.3;
    let n = 6;
    let m = 3;
    let delta = delta_trivial(eps, n).unwrap();
    let mut passes = 0u32;
    for s in 0..100u64 {
        let g = polymatrix_random(n, m, delta, derive_seed(seed, s));
        let a0 = PureProfile(vec![0; n]);
        let b = two_step_construction(&g, &a0);
        if is_pure_eps_equilibrium(&g, &b, eps, DEFAULT_TOL) {
            passes += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    CriterionResult {
        name: "1-prop1-construction".into(),
        pass: passes == 100 && elapsed < 5.0,
        details: json!({
            "passes": passes, "games": 100, "eps": eps, "n": n, "m": m,
            "delta": delta, "elapsed_s": elapsed, "runtime_limit_s": 5.0,
        }),
    }
}

/// Criterion 2: exhaustive search finds a pure 0.3-equilibrium in all 100
/// seeded polymatrix games at the main threshold (n = 12, m = 2), within 2 min.
pub fn criterion_thm2_existence(seed: u64, budget: Budget) -> CriterionResult {
    let start = Instant::now();
    let eps = 0.3;
    let n = 12;
    let m = 2;
    let delta = delta_main(eps, m, n).unwrap();
    let mut found = 0u32;
    let mut min_count = u128::MAX;
    for s in 0..100u64 {
        let g = polymatrix_random(n, m, delta, derive_seed(seed, s));
        match exhaustive_pure_search(&g, eps, DEFAULT_TOL, budget) {
            Ok(out) if out.first.is_some() => {
                found += 1;
                min_count = min_count.min(out.count);
            }
            _ => {}
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    CriterionResult {
        name: "2-thm2-existence".into(),
        pass: found == 100 && elapsed < 120.0,
        details: json!({
            "found": found, "games": 100, "eps": eps, "n": n, "m": m,
            "delta": delta, "min_equilibrium_count": min_count as u64,
            "elapsed_s": elapsed, "runtime_limit_s": 120.0,
        }),
    }
}

/// Criterion 3: on the same polymatrix family, profiles sampled from a mixed
/// equilibrium (slack ≤ 1e−6) pass the full ε-equilibrium check at a rate of
/// at least the certificate's lower bound minus 3 binomial σ.
pub fn criterion_self_purification_rate(seed: u64, budget: Budget) -> CriterionResult {
    let eps = 0.3;
    let n = 12;
    let m = 2;
    let delta = delta_main(eps, m, n).unwrap();
    let samples = 10_000u64;
    let cert = certificate(eps, delta, n, m).unwrap();
    let slb = cert.success_lower_bound;
    let sigma = (slb * (1.0 - slb) / samples as f64).sqrt();
    let threshold = slb - 3.0 * sigma;
    let mut per_seed = Vec::new();
    let mut solved = 0u32;
    let mut ok = 0u32;
    for s in 0..10u64 {
        let g = polymatrix_random(n, m, delta, derive_seed(seed, s));
        let Ok((mu, slack)) = polymatrix_mixed_nash(&g, 1e-6, budget) else {
            per_seed.push(json!({"seed": s, "solved": false}));
            continue;
        };
        solved += 1;
        let rate = purification_rate(&g, &mu, eps, samples, derive_seed(seed, 1000 + s)).unwrap();
        let pass = rate >= threshold;
        if pass {
            ok += 1;
        }
        per_seed.push(json!({
            "seed": s, "solved": true, "slack": slack, "rate": rate, "pass": pass,
        }));
    }
    CriterionResult {
        name: "3-self-purification-rate".into(),
        pass: solved > 0 && ok == solved,
        details: json!({
            "success_lower_bound": slb, "threshold": threshold, "sigma": sigma,
            "samples": samples, "solved": solved, "passing": ok, "per_seed": per_seed,
        }),
    }
}

/// Criterion 4: for the normalized sum of 100 uniform signs, the empirical
/// upper tail over 10^5 samples respects exp(−r²·100/2) (plus 5σ slack) at
/// r ∈ {0.2, 0.3, 0.5}, and the exact binomial tail agrees within 3σ.
pub fn criterion_concentration(seed: u64, _budget: Budget) -> CriterionResult {
    let n = 100usize;
    let samples = 100_000u64;
    let mu = MixedProfile {
        distributions: vec![vec![0.5, 0.5]; n],
    };
    let f = |a: &[usize]| -> f64 {
        let sum: f64 = a.iter().map(|&b| (1 - 2 * b as i64) as f64).sum();
        sum / n as f64
    };
    // Exact tail oracle: j heads of strategy 1 give F = (n − 2j)/n, compared
    // with the same float expression the empirical pass uses.
    let binom_tail = |r: f64| -> f64 {
        let denom = 2f64.powi(n as i32);
        (0..=n)
            .filter(|&j| (n as f64 - 2.0 * j as f64) / n as f64 >= r)
            .map(|j| binomial(n as u64, j as u64) as f64 / denom)
            .sum()
    };
    let mut rows = Vec::new();
    let mut all_ok = true;
    for (idx, r) in [0.2f64, 0.3, 0.5].into_iter().enumerate() {
        let check = concentration_tail_check(
            f,
            &mu,
            2.0 / n as f64,
            r,
            samples,
            derive_seed(seed, idx as u64),
            Some(0.0),
            false,
        );
        let hoeffding = (-r * r * n as f64 / 2.0).exp();
        let sigma_bound = (hoeffding * (1.0 - hoeffding) / samples as f64).sqrt();
        let bound_ok = check.empirical <= hoeffding + 5.0 * sigma_bound;
        let oracle = binom_tail(r);
        let sigma_oracle = (oracle * (1.0 - oracle) / samples as f64).sqrt();
        let oracle_ok = (check.empirical - oracle).abs() <= 3.0 * sigma_oracle + 1e-12;
        all_ok &= bound_ok && oracle_ok;
        rows.push(json!({
            "r": r, "empirical": check.empirical, "hoeffding_bound": hoeffding,
            "binomial_oracle": oracle, "bound_ok": bound_ok, "oracle_ok": oracle_ok,
        }));
    }
    CriterionResult {
        name: "4-concentration".into(),
        pass: all_ok,
        details: json!({"n": n, "samples": samples, "tails": rows}),
    }
}

/// Criterion 5: discrepancy pipeline — matrix search at k = 15 in < 60 s; the
/// k = 7 game has no pure 1/3-equilibrium; exact zero-sum on 10^3 random
/// profiles; δ ≤ 2·(20/√k) at k = 3; all payoffs within [−1, 1].
pub fn criterion_gale_berlekamp(seed: u64, budget: Budget) -> CriterionResult {
    let start = Instant::now();
    let k15 = find_gb_matrix(15, seed, 10_000, budget);
    let k15_elapsed = start.elapsed().as_secs_f64();
    let (k15_ok, k15_attempts) = match &k15 {
        Ok((_, attempts)) => (k15_elapsed < 60.0, *attempts),
        Err(_) => (false, 0),
    };

    let mut details = json!({
        "k15_found": k15.is_ok(), "k15_attempts": k15_attempts,
        "k15_elapsed_s": k15_elapsed, "k15_runtime_limit_s": 60.0,
    });
    let obj = details.as_object_mut().unwrap();

    // k = 7: verified matrix, then an exhaustive scan of all 2^14 profiles.
    let mut no_third_eq = false;
    let mut zero_sum_ok = false;
    let mut payoffs_in_range = true;
    if let Ok((m7, _)) = find_gb_matrix(7, derive_seed(seed, 7), 10_000, budget) {
        let delta7 = 20.0 / (7f64).sqrt();
        let g7 = build_gb_game(m7.clone(), delta7);
        let found = exhaustive_pure_search(&g7, 1.0 / 3.0, DEFAULT_TOL, budget).unwrap();
        no_third_eq = found.count == 0;
        obj.insert("k7_equilibrium_count".into(), json!(found.count as u64));

        let mut rng = crate::rng::sub_rng(seed, 99);
        use rand::Rng as _;
        zero_sum_ok = true;
        for _ in 0..1000 {
            let a: Vec<usize> = (0..14).map(|_| rng.gen_range(0..2usize)).collect();
            // The zero-sum identity is exact in the untruncated payoffs:
            // the integer payoff cores of females and males cancel.
            let females: i64 = (0..7).map(|i| crate::counterexamples::gb_core(&m7, i, &a)).sum();
            let males: i64 = (7..14).map(|i| crate::counterexamples::gb_core(&m7, i, &a)).sum();
            if females + males != 0 {
                zero_sum_ok = false;
            }
            if (0..14).any(|i| g7.payoff(i, &a).abs() > 1.0) {
                payoffs_in_range = false;
            }
        }
    }
    obj.insert("k7_no_pure_third_equilibrium".into(), json!(no_third_eq));
    obj.insert("zero_sum_exact_1000_profiles".into(), json!(zero_sum_ok));

    // k = 3: exact Lipschitz constant against the 2δ bound, all payoffs.
    let m3 = SignMatrix::random(3, derive_seed(seed, 3)).unwrap();
    let delta3 = 20.0 / (3f64).sqrt();
    let g3 = build_gb_game(m3, delta3);
    let d3 = lipschitz_constant_exact(&g3, budget).unwrap();
    let lipschitz_ok = d3 <= 2.0 * delta3 + 1e-12;
    let counts = vec![2usize; 6];
    let mut a = vec![0usize; 6];
    loop {
        if (0..6).any(|i| g3.payoff(i, &a).abs() > 1.0) {
            payoffs_in_range = false;
        }
        if !advance_profile(&counts, &mut a) {
            break;
        }
    }
    obj.insert("k3_lipschitz".into(), json!(d3));
    obj.insert("k3_lipschitz_bound".into(), json!(2.0 * delta3));
    obj.insert("payoffs_within_unit_interval".into(), json!(payoffs_in_range));

    CriterionResult {
        name: "5-gale-berlekamp".into(),
        pass: k15_ok && no_third_eq && zero_sum_ok && lipschitz_ok && payoffs_in_range,
        details,
    }
}

/// Criterion 6: mass matching pennies — δ = 1/4 exactly at k = 2, no pure
/// 1/8-equilibrium, best-response value exactly 1/4 everywhere; same no-
/// equilibrium and best-response facts at k = 3 in < 1 min.
pub fn criterion_mass_mp(_seed: u64, budget: Budget) -> CriterionResult {
    let start = Instant::now();
    let mut obj = serde_json::Map::new();
    let mut pass = true;

    let br_everywhere_quarter = |g: &Game, players: usize, m: usize| -> bool {
        let counts = vec![m; players];
        let mut a = vec![0usize; players];
        loop {
            for i in 0..players {
                let best = (0..m)
                    .map(|s| {
                        let mut b = a.clone();
                        b[i] = s;
                        g.payoff(i, &b)
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                if best != 0.25 {
                    return false;
                }
            }
            if !advance_profile(&counts, &mut a) {
                return true;
            }
        }
    };

    for k in [2usize, 3] {
        let g = build_mass_mp_game(k).unwrap();
        let players = 2 * k;
        let m = 1usize << k;
        let label = format!("k{k}");
        if k == 2 {
            let d = lipschitz_constant_exact(&g, budget).unwrap();
            obj.insert(format!("{label}_lipschitz"), json!(d));
            pass &= d == 0.25;
        }
        let found = exhaustive_pure_search(&g, 0.125, DEFAULT_TOL, budget).unwrap();
        obj.insert(
            format!("{label}_eighth_equilibria"),
            json!(found.count as u64),
        );
        pass &= found.count == 0;
        let br_ok = br_everywhere_quarter(&g, players, m);
        obj.insert(format!("{label}_best_response_quarter"), json!(br_ok));
        pass &= br_ok;
    }
    let elapsed = start.elapsed().as_secs_f64();
    obj.insert("elapsed_s".into(), json!(elapsed));
    obj.insert("runtime_limit_s".into(), json!(60.0));
    pass &= elapsed < 60.0;
    CriterionResult {
        name: "6-mass-matching-pennies".into(),
        pass,
        details: Value::Object(obj),
    }
}

/// Criterion 7: the anonymous purification pipeline on 50 random games
/// (n = 20, m = 3, δ = 0.05): regret ≤ 2mδ when slack ≤ 1e−6,
/// convergence failures < 10%, L1 gap ≤ 2(m−1), per-opponent change ≤ 2m.
pub fn criterion_anonymous_pipeline(seed: u64, _budget: Budget) -> CriterionResult {
    let n = 20;
    let m = 3;
    let delta = 0.05;
    let regret_cap = 2.0 * m as f64 * delta;
    let mut failures = 0u32;
    let mut regret_ok = true;
    let mut gap_ok = true;
    let mut per_opp_ok = true;
    let mut worst_regret = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut worst_per_opp = 0.0f64;
    for s in 0..50u64 {
        let g = random_anonymous(n, m, delta, derive_seed(seed, s)).unwrap();
        let out = crate::anonymous::anonymous_purify(&g, 1e-6, derive_seed(seed, 100 + s)).unwrap();
        if !out.solution.converged {
            failures += 1;
        } else {
            regret_ok &= out.regret <= regret_cap + DEFAULT_TOL;
            worst_regret = worst_regret.max(out.regret);
        }
        gap_ok &= out.rounding.l1_gap <= 2.0 * (m as f64 - 1.0) + 1e-9;
        worst_gap = worst_gap.max(out.rounding.l1_gap);
        // Per-opponent aggregate change between the fractional solution and
        // the rounded profile, for every player's point of view.
        let total_frac: Vec<f64> = (0..m)
            .map(|t| out.solution.points.iter().map(|p| p[t]).sum())
            .collect();
        let mut total_round = vec![0.0f64; m];
        for &s in &out.profile.0 {
            total_round[s] += 1.0;
        }
        for i in 0..n {
            let change: f64 = (0..m)
                .map(|t| {
                    let frac = total_frac[t] - out.solution.points[i][t];
                    let round =
                        total_round[t] - if out.profile.0[i] == t { 1.0 } else { 0.0 };
                    (frac - round).abs()
                })
                .sum();
            per_opp_ok &= change <= 2.0 * m as f64 + 1e-9;
            worst_per_opp = worst_per_opp.max(change);
        }
    }
    let failure_ok = failures < 5; // < 10% of 50 seeds
    CriterionResult {
        name: "7-anonymous-pipeline".into(),
        pass: failure_ok && regret_ok && gap_ok && per_opp_ok,
        details: json!({
            "seeds": 50, "n": n, "m": m, "delta": delta,
            "convergence_failures": failures,
            "regret_cap": regret_cap, "worst_regret": worst_regret,
            "l1_gap_cap": 2.0 * (m as f64 - 1.0), "worst_l1_gap": worst_gap,
            "per_opponent_cap": 2.0 * m as f64, "worst_per_opponent": worst_per_opp,
        }),
    }
}

/// Criterion 8: restaurant game — home payoff near 1/2 at n = 500, exact
/// zero mixed regret for the uniform profile, and a vanishing purification
/// success probability over n ∈ {50, 200, 800}.
pub fn criterion_restaurant(seed: u64, budget: Budget) -> CriterionResult {
    let delta = 0.1;
    let home = restaurant_home_payoff(500, delta);
    let home_ok = (0.4..=0.6).contains(&home);

    let ag = build_restaurant_game(500, delta, budget).unwrap();
    let g = Game::from_anonymous(Arc::new(ag), GameKind::Restaurant);
    let mu = MixedProfile::uniform(&g);
    let r = mixed_regret(&g, &mu, ExpectationMode::Exact { budget }).unwrap();
    let regret_ok = r == 0.0;

    let eps = 0.1;
    let probs: Vec<f64> = [50usize, 200, 800]
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            purification_failure_experiment(n, delta, eps, 10_000, derive_seed(seed, idx as u64))
        })
        .collect();
    let nonincreasing = probs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let tail_small = probs[2] < 0.1;

    CriterionResult {
        name: "8-restaurant".into(),
        pass: home_ok && regret_ok && nonincreasing && tail_small,
        details: json!({
            "home_payoff_n500": home, "home_in_range": home_ok,
            "uniform_mixed_regret": r, "regret_exactly_zero": regret_ok,
            "eps": eps, "success_probabilities": probs,
            "nonincreasing": nonincreasing, "n800_below_0.1": tail_small,
        }),
    }
}

/// Criterion 9: replication of matching pennies at L = 8000, ε = 0.3 via
/// self-purification succeeds in ≥ 18 of 20 seeds with the projection near
/// (1/2, 1/2); δ(G′)·L ≤ δ(G) verified exactly at L ≤ 3.
pub fn criterion_replication(seed: u64, budget: Budget) -> CriterionResult {
    let base = Arc::new(matching_pennies());
    let uniform = MixedProfile::uniform(&base);
    let eps = 0.3;
    let l = 8000;
    let mut successes = 0u32;
    let mut per_seed = Vec::new();
    for s in 0..20u64 {
        let res = nash_via_replication(
            &base,
            eps,
            l,
            ReplicationMethod::SelfPurify,
            Some(&uniform),
            derive_seed(seed, s),
            budget,
        );
        match res {
            Ok(out) => {
                let near_half = out
                    .mu
                    .distributions
                    .iter()
                    .all(|d| d.iter().all(|&w| (w - 0.5).abs() <= 0.1));
                let ok = out.meets_eps && near_half;
                if ok {
                    successes += 1;
                }
                per_seed.push(json!({
                    "seed": s, "ok": ok, "mixed_regret": out.mixed_regret,
                    "tries": out.tries, "mu": out.mu.distributions,
                }));
            }
            Err(e) => per_seed.push(json!({"seed": s, "ok": false, "error": e.to_string()})),
        }
    }
    let shrink_ok = (1..=3usize)
        .all(|l| replication_lipschitz_check(&base, l, budget).unwrap_or(false));
    CriterionResult {
        name: "9-replication".into(),
        pass: successes >= 18 && shrink_ok,
        details: json!({
            "successes": successes, "seeds": 20, "required": 18,
            "L": l, "eps": eps, "lipschitz_shrink_exact_L_le_3": shrink_ok,
            "per_seed": per_seed,
        }),
    }
}

/// Criterion 10: oracle equivalences — replicated count-based payoffs vs
/// tuple averaging (n = 2, L ≤ 3), exhaustive discrepancy vs the naive 2^k
/// oracle (k ≤ 16), and anonymous adjacency Lipschitz vs the generic exact
/// constant (n = 5, m = 2). All bitwise.
pub fn criterion_oracles(seed: u64, budget: Budget) -> CriterionResult {
    // (a) replicated payoffs vs explicit tuple averaging on matching pennies.
    let base = Arc::new(matching_pennies());
    let mut replicated_ok = true;
    for l in [2usize, 3] {
        let rg = replicate(Arc::clone(&base), l).unwrap();
        let players = 2 * l;
        let counts = vec![2usize; players];
        let mut a = vec![0usize; players];
        loop {
            for t in 0..players {
                let group = t / l;
                let other = 1 - group;
                // Average base payoffs over the other group's members.
                let mut acc = 0.0;
                for u in 0..l {
                    let mut tuple = [0usize; 2];
                    tuple[group] = a[t];
                    tuple[other] = a[other * l + u];
                    acc += base.payoff(group, &tuple);
                }
                if rg.payoff(t, &a).to_bits() != (acc / l as f64).to_bits() {
                    replicated_ok = false;
                }
            }
            if !advance_profile(&counts, &mut a) {
                break;
            }
        }
    }

    // (b) exhaustive discrepancy verdicts vs the naive full-2^k oracle.
    let mut discrepancy_ok = true;
    let mut discrepancy_rows = Vec::new();
    for (idx, k) in [8usize, 12, 16].into_iter().enumerate() {
        let m = SignMatrix::random(k, derive_seed(seed, idx as u64)).unwrap();
        let fast = verify_discrepancy(&m, DiscrepancyMode::Exhaustive, budget).unwrap();
        let mut naive_worst = usize::MAX;
        for bits in 0u64..(1u64 << k) {
            let x: Vec<i64> = (0..k).map(|t| 1 - 2 * ((bits >> t) & 1) as i64).collect();
            let count = (0..k)
                .filter(|&j| {
                    let z: i64 = (0..k).map(|t| x[t] * m.entry(t, j)).sum();
                    400 * z * z > k as i64
                })
                .count();
            naive_worst = naive_worst.min(count);
        }
        let naive_ok = 3 * naive_worst > k;
        let agree = fast.ok == naive_ok && fast.worst_count == naive_worst;
        discrepancy_ok &= agree;
        discrepancy_rows.push(json!({
            "k": k, "fast_ok": fast.ok, "fast_worst": fast.worst_count,
            "naive_worst": naive_worst, "agree": agree,
        }));
    }

    // (c) anonymous adjacency Lipschitz vs the generic profile-flip scan.
    let mut anonymous_ok = true;
    for s in 0..3u64 {
        let ag = random_anonymous(5, 2, 0.2, derive_seed(seed, 100 + s)).unwrap();
        let mut adjacency_max = 0.0f64;
        let dists = ag.dists();
        for rank in 0..dists.len() {
            let d = dists.counts(rank).to_vec();
            if d[0] == 0 {
                continue;
            }
            let mut d2 = d.clone();
            d2[0] -= 1;
            d2[1] += 1;
            let rank2 = dists.rank(&d2).unwrap();
            for i in 0..5 {
                for st in 0..2 {
                    let diff =
                        (ag.payoff_by_rank(i, st, rank) - ag.payoff_by_rank(i, st, rank2)).abs();
                    adjacency_max = adjacency_max.max(diff);
                }
            }
        }
        let g = Game::from_anonymous(Arc::new(ag), GameKind::Anonymous);
        let generic = lipschitz_constant_exact(&g, budget).unwrap();
        anonymous_ok &= generic.to_bits() == adjacency_max.to_bits();
    }

    CriterionResult {
        name: "10-oracle-equivalences".into(),
        pass: replicated_ok && discrepancy_ok && anonymous_ok,
        details: json!({
            "replicated_tuple_average_bitwise": replicated_ok,
            "discrepancy": discrepancy_rows,
            "anonymous_lipschitz_bitwise": anonymous_ok,
        }),
    }
}

/// Run one numbered criterion (1-based).
pub fn run_criterion(number: usize, seed: u64, budget: Budget) -> Result<CriterionResult> {
    Ok(match number {
        1 => criterion_prop1_construction(seed, budget),
        2 => criterion_thm2_existence(seed, budget),
        3 => criterion_self_purification_rate(seed, budget),
        4 => criterion_concentration(seed, budget),
        5 => criterion_gale_berlekamp(seed, budget),
        6 => criterion_mass_mp(seed, budget),
        7 => criterion_anonymous_pipeline(seed, budget),
        8 => criterion_restaurant(seed, budget),
        9 => criterion_replication(seed, budget),
        10 => criterion_oracles(seed, budget),
        _ => {
            return Err(Error::Domain(format!(
                "no acceptance criterion numbered {number}"
            )))
        }
    })
}

/// Criteria covered by each named preset.
pub fn preset_criteria(name: &str) -> Option<&'static [usize]> {
    Some(match name {
        "prop1" => &[1],
        "thm2-sweep" => &[2, 3, 4],
        "thm3" => &[5],
        "prop3" => &[6],
        "thm4" => &[7],
        "restaurant" => &[8],
        "replication" => &[9, 10],
        "all" => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        _ => return None,
    })
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "prop1",
        "thm2-sweep",
        "thm3",
        "prop3",
        "thm4",
        "restaurant",
        "replication",
        "all",
    ]
}

/// Run a named preset, returning one result per covered criterion.
pub fn run_experiment(name: &str, seed: u64, budget: Budget) -> Result<Vec<CriterionResult>> {
    let numbers = preset_criteria(name).ok_or_else(|| {
        Error::Domain(format!(
            "unknown experiment '{name}'; known: {}",
            preset_names().join(", ")
        ))
    })?;
    numbers
        .iter()
        .map(|&k| run_criterion(k, seed, budget))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_resolve() {
        for name in preset_names() {
            assert!(preset_criteria(name).is_some());
        }
        assert!(preset_criteria("nope").is_none());
    }

    #[test]
    fn unknown_experiment_is_a_domain_error() {
        assert!(run_experiment("nope", 0, EXPERIMENT_BUDGET).is_err());
    }

    #[test]
    fn criterion_numbers_are_dense() {
        assert!(run_criterion(0, 0, EXPERIMENT_BUDGET).is_err());
        assert!(run_criterion(11, 0, EXPERIMENT_BUDGET).is_err());
    }
}

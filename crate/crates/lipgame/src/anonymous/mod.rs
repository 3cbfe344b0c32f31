//! Anonymous games: payoffs depend on opponents only through their strategy
//! counts. Provides the count-distribution lattice, the Lipschitz extension
//! of the payoff table to the simplex, the auxiliary continuous game, and the
//! purification pipeline built on Shapley–Folkman rounding.

mod rounding;
mod solver;

pub use rounding::{anonymous_purify, shapley_folkman_round, PurifyOutcome, RoundingOutcome};
pub use solver::{solve_auxiliary, AuxiliarySolution, SolverPath};

use std::collections::HashMap;
use std::sync::RwLock;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{Budget, GameSpec};
use crate::rng::rng_from_seed;

/// Hard cap on the size of the enumerated distribution lattice.
pub const MAX_DIST_COUNT: u64 = 1_000_000;

/// An integral point of Δ_n(S): per-strategy counts summing to `mass`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    pub counts: Vec<u32>,
}

impl Distribution {
    pub fn mass(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// A real-valued point of Δ_n(S): nonnegative weights summing to `mass`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint {
    pub weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Strategy counts over all players of `a` except `exclude`.
pub fn distribution_of(a: &[usize], exclude: Option<usize>, m: usize) -> Distribution {
    let mut counts = vec![0u32; m];
    for (j, &s) in a.iter().enumerate() {
        if Some(j) != exclude {
            counts[s] += 1;
        }
    }
    Distribution { counts }
}

/// `C(n, k)` without overflow at the sizes this crate enumerates.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All distributions of a fixed mass over `m` strategies, in colexicographic
/// order of the count vector, with O(1) rank lookup.
pub struct DistIndex {
    m: usize,
    mass: u32,
    list: Vec<Vec<u32>>,
    ranks: HashMap<Vec<u32>, usize>,
}

impl DistIndex {
    pub fn new(mass: u32, m: usize) -> DistIndex {
        assert!(m >= 1);
        let mut list = Vec::new();
        let mut scratch = vec![0u32; m];
        gen_colex(m, mass, &mut scratch, &mut list);
        let ranks = list
            .iter()
            .enumerate()
            .map(|(r, c)| (c.clone(), r))
            .collect();
        DistIndex {
            m,
            mass,
            list,
            ranks,
        }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn mass(&self) -> u32 {
        self.mass
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn counts(&self, rank: usize) -> &[u32] {
        &self.list[rank]
    }

    pub fn rank(&self, counts: &[u32]) -> Option<usize> {
        self.ranks.get(counts).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.list.iter()
    }

    /// Lattice size C(mass + m − 1, m − 1) without materializing anything.
    pub fn size_of(mass: u32, m: usize) -> u128 {
        binomial(mass as u64 + m as u64 - 1, m as u64 - 1)
    }
}

// Colex ascending: the last coordinate varies slowest among recursions, so
// vectors compare by their last differing coordinate.
fn gen_colex(pos: usize, remaining: u32, scratch: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == 1 {
        scratch[0] = remaining;
        out.push(scratch.clone());
        return;
    }
    for last in 0..=remaining {
        scratch[pos - 1] = last;
        gen_colex(pos - 1, remaining - last, scratch, out);
    }
}

/// `‖d − d′‖₁ / 2` for integer count vectors.
pub fn half_l1_counts(a: &[u32], b: &[u32]) -> f64 {
    let sum: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as i64 - y as i64).unsigned_abs())
        .sum();
    sum as f64 / 2.0
}

/// `‖d − x‖₁ / 2` between a count vector and a real point.
pub fn half_l1_mixed(d: &[u32], x: &[f64]) -> f64 {
    let sum: f64 = d.iter().zip(x).map(|(&c, &w)| (c as f64 - w).abs()).sum();
    sum / 2.0
}

/// An anonymous game: `n` players over a common `m`-strategy set, payoff
/// table `F_i(s, d)` over opponent-count distributions `d` of mass `n−1`,
/// with a declared Lipschitz constant validated on construction.
pub struct AnonymousGame {
    n: usize,
    m: usize,
    delta: f64,
    dists: DistIndex,
    /// Flattened by (player, strategy, distribution rank); `player_stride`
    /// is 0 for symmetric games that share one table.
    table: Vec<f64>,
    player_stride: usize,
    /// Per (effective player, strategy): the constant when F is constant in
    /// the distribution, detected at construction (exact equality).
    constants: Vec<Option<f64>>,
    spec: GameSpec,
    ext_cache: RwLock<HashMap<(usize, usize, Vec<u64>), f64>>,
}

impl std::fmt::Debug for AnonymousGame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnonymousGame")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("delta", &self.delta)
            .field("symmetric", &(self.player_stride == 0))
            .finish_non_exhaustive()
    }
}

impl AnonymousGame {
    /// Per-player table: `f` flattened by (player, strategy, rank).
    pub fn new(n: usize, m: usize, delta: f64, f: Vec<f64>, budget: Budget) -> Result<AnonymousGame> {
        if n < 2 || m < 1 {
            return Err(Error::InvalidGame("need n ≥ 2 players and m ≥ 1 strategies".into()));
        }
        let dists = Self::make_index(n, m, budget)?;
        let expect = n * m * dists.len();
        if f.len() != expect {
            return Err(Error::ShapeMismatch(format!(
                "anonymous table needs {expect} entries (n·m·|D|), got {}",
                f.len()
            )));
        }
        let spec = GameSpec::Anonymous {
            n,
            m,
            delta,
            f: f.clone(),
        };
        Self::finish(n, m, delta, dists, f, spec)
    }

    /// Symmetric table shared by all players: `f` flattened by (strategy, rank).
    pub(crate) fn new_symmetric(
        n: usize,
        m: usize,
        delta: f64,
        f: Vec<f64>,
        spec: GameSpec,
        budget: Budget,
    ) -> Result<AnonymousGame> {
        if n < 2 || m < 1 {
            return Err(Error::InvalidGame("need n ≥ 2 players and m ≥ 1 strategies".into()));
        }
        let dists = Self::make_index(n, m, budget)?;
        let expect = m * dists.len();
        if f.len() != expect {
            return Err(Error::ShapeMismatch(format!(
                "symmetric anonymous table needs {expect} entries (m·|D|), got {}",
                f.len()
            )));
        }
        Self::finish(n, m, delta, dists, f, spec)
    }

    fn make_index(n: usize, m: usize, budget: Budget) -> Result<DistIndex> {
        let size = DistIndex::size_of(n as u32 - 1, m);
        let cap = MAX_DIST_COUNT.min(budget);
        if size > cap as u128 {
            return Err(Error::BudgetExceeded {
                required: size,
                budget: cap,
            });
        }
        Ok(DistIndex::new(n as u32 - 1, m))
    }

    fn finish(
        n: usize,
        m: usize,
        delta: f64,
        dists: DistIndex,
        table: Vec<f64>,
        spec: GameSpec,
    ) -> Result<AnonymousGame> {
        let player_stride = if table.len() == m * dists.len() {
            0
        } else {
            m * dists.len()
        };
        let g = AnonymousGame {
            n,
            m,
            delta,
            dists,
            table,
            player_stride,
            constants: Vec::new(),
            spec,
            ext_cache: RwLock::new(HashMap::new()),
        };
        g.validate_lipschitz()?;
        let players = if g.player_stride == 0 { 1 } else { n };
        let mut constants = Vec::with_capacity(players * m);
        for i in 0..players {
            for s in 0..m {
                let first = g.table[i * g.player_stride + s * g.dists.len()];
                let col = &g.table[i * g.player_stride + s * g.dists.len()..][..g.dists.len()];
                constants.push(if col.iter().all(|&v| v == first) {
                    Some(first)
                } else {
                    None
                });
            }
        }
        Ok(AnonymousGame { constants, ..g })
    }

    /// Check |F_i(s,d) − F_i(s,d′)| ≤ δ for every adjacent pair (adjacent
    /// distributions move one unit between two cells, ‖·‖₁ = 2).
    fn validate_lipschitz(&self) -> Result<()> {
        let players = if self.player_stride == 0 { 1 } else { self.n };
        let bound = self.delta + 1e-9;
        for rank in 0..self.dists.len() {
            let d = self.dists.counts(rank).to_vec();
            for from in 0..self.m {
                if d[from] == 0 {
                    continue;
                }
                for to in 0..self.m {
                    if to == from {
                        continue;
                    }
                    let mut d2 = d.clone();
                    d2[from] -= 1;
                    d2[to] += 1;
                    let rank2 = self.dists.rank(&d2).unwrap();
                    if rank2 < rank {
                        continue; // each unordered pair once
                    }
                    for i in 0..players {
                        for s in 0..self.m {
                            let a = self.payoff_by_rank(i, s, rank);
                            let b = self.payoff_by_rank(i, s, rank2);
                            if (a - b).abs() > bound {
                                return Err(Error::LipschitzViolation {
                                    a: format!("F_{i}({s}, {d:?})"),
                                    b: format!("F_{i}({s}, {d2:?})"),
                                    diff: (a - b).abs(),
                                    bound: self.delta,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// True when all players share one payoff table.
    pub fn is_symmetric(&self) -> bool {
        self.player_stride == 0
    }

    pub fn dists(&self) -> &DistIndex {
        &self.dists
    }

    pub fn to_spec(&self) -> GameSpec {
        self.spec.clone()
    }

    fn eff(&self, i: usize) -> usize {
        if self.player_stride == 0 {
            0
        } else {
            i
        }
    }

    pub fn payoff_by_rank(&self, i: usize, s: usize, rank: usize) -> f64 {
        // player_stride is 0 for symmetric games, collapsing the player axis.
        self.table[i * self.player_stride + s * self.dists.len() + rank]
    }

    /// `F_i(s, d)` for an explicit count vector of mass n−1.
    pub fn payoff_counts(&self, i: usize, s: usize, counts: &[u32]) -> f64 {
        let rank = self
            .dists
            .rank(counts)
            .expect("count vector of mass n-1 over m strategies");
        self.payoff_by_rank(i, s, rank)
    }

    /// The constant value of `F_i(s, ·)` when it does not depend on the
    /// distribution at all.
    pub fn constant_value(&self, i: usize, s: usize) -> Option<f64> {
        self.constants[self.eff(i) * self.m + s]
    }

    /// Payoff at a full pure profile (counts opponents, then looks up).
    pub fn payoff_profile(&self, i: usize, a: &[usize]) -> f64 {
        let d = distribution_of(a, Some(i), self.m);
        self.payoff_counts(i, a[i], &d.counts)
    }

    /// `F_i(s, d(a_{−i}))` for every own strategy `s` with one count pass.
    pub fn deviation_row(&self, i: usize, a: &[usize]) -> Vec<f64> {
        let d = distribution_of(a, Some(i), self.m);
        let rank = self.dists.rank(&d.counts).expect("valid profile");
        (0..self.m).map(|s| self.payoff_by_rank(i, s, rank)).collect()
    }

    /// [`Self::deviation_row`] for every player with a single counting pass:
    /// the total counts are computed once, then each player removes herself.
    pub fn deviation_table(&self, a: &[usize]) -> Vec<Vec<f64>> {
        let total = distribution_of(a, None, self.m);
        let mut counts = total.counts;
        a.iter()
            .enumerate()
            .map(|(i, &own)| {
                counts[own] -= 1;
                let rank = self.dists.rank(&counts).expect("valid profile");
                counts[own] += 1;
                (0..self.m)
                    .map(|s| self.payoff_by_rank(i, s, rank))
                    .collect()
            })
            .collect()
    }

    /// The Lipschitz extension
    /// `F_i(s, x) = max_d { F_i(s, d) − δ‖d − x‖₁/2 }` over the mass-(n−1)
    /// lattice. Agrees with the table at integral points; results are
    /// memoized behind a read-mostly cache.
    pub fn extension(&self, i: usize, s: usize, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.m);
        if let Some(c) = self.constant_value(i, s) {
            return c;
        }
        // Integral shortcut, exact table agreement at lattice points.
        let mut integral = true;
        let mut rounded = vec![0u32; self.m];
        let mut total: u32 = 0;
        for (t, &w) in x.iter().enumerate() {
            let r = w.round();
            if (w - r).abs() > 1e-9 || r < 0.0 {
                integral = false;
                break;
            }
            rounded[t] = r as u32;
            total += rounded[t];
        }
        if integral && total == self.dists.mass() {
            return self.payoff_counts(i, s, &rounded);
        }
        let key = (
            self.eff(i),
            s,
            x.iter().map(|w| w.to_bits()).collect::<Vec<u64>>(),
        );
        if let Some(&v) = self.ext_cache.read().unwrap().get(&key) {
            return v;
        }
        let base = self.eff(i) * self.player_stride + s * self.dists.len();
        let col = &self.table[base..base + self.dists.len()];
        let mut best = f64::NEG_INFINITY;
        for (rank, d) in self.dists.iter().enumerate() {
            let v = col[rank] - self.delta * half_l1_mixed(d, x);
            if v > best {
                best = v;
            }
        }
        self.ext_cache.write().unwrap().insert(key, best);
        best
    }

    /// [`Self::extension`] for every own strategy at the same point.
    pub fn extension_row(&self, i: usize, x: &[f64]) -> Vec<f64> {
        (0..self.m).map(|s| self.extension(i, s, x)).collect()
    }

    /// Extension value together with a subgradient in `x`: at the (first)
    /// maximizing distribution `d*`, the penalty term contributes
    /// `−δ/2·sign(x_t − d*_t)` per coordinate (0 on ties and for constant
    /// columns). Used by the solver's local linearization.
    pub fn extension_value_grad(&self, i: usize, s: usize, x: &[f64]) -> (f64, Vec<f64>) {
        if let Some(c) = self.constant_value(i, s) {
            return (c, vec![0.0; self.m]);
        }
        let base = self.eff(i) * self.player_stride + s * self.dists.len();
        let col = &self.table[base..base + self.dists.len()];
        let mut best = f64::NEG_INFINITY;
        let mut best_rank = 0;
        for (rank, d) in self.dists.iter().enumerate() {
            let v = col[rank] - self.delta * half_l1_mixed(d, x);
            if v > best {
                best = v;
                best_rank = rank;
            }
        }
        let dstar = self.dists.counts(best_rank);
        let grad = x
            .iter()
            .zip(dstar)
            .map(|(&w, &c)| {
                let diff = w - c as f64;
                if diff.abs() < 1e-12 {
                    0.0
                } else {
                    -self.delta / 2.0 * diff.signum()
                }
            })
            .collect();
        (best, grad)
    }
}

/// The auxiliary game's payoff `R_i(p) = Σ_s p_i[s]·F_i(s, Σ_{j≠i} p_j)`,
/// linear in the player's own mixture.
pub fn auxiliary_payoff(g: &AnonymousGame, i: usize, p: &[Vec<f64>]) -> f64 {
    assert_eq!(p.len(), g.n());
    let mut x = vec![0.0; g.m()];
    for (j, pj) in p.iter().enumerate() {
        if j != i {
            for (t, &w) in pj.iter().enumerate() {
                x[t] += w;
            }
        }
    }
    p[i].iter()
        .enumerate()
        .map(|(s, &w)| if w == 0.0 { 0.0 } else { w * g.extension(i, s, &x) })
        .sum()
}

/// Random δ-Lipschitz anonymous game: each `F_i(s, ·)` is grown outward from
/// the lattice vertex `(n−1, 0, …, 0)`; every new value is a perturbation of
/// an assigned neighbor clamped into the interval forced by *all* assigned
/// points, so the Lipschitz property holds globally by construction.
pub fn random_anonymous(n: usize, m: usize, delta: f64, seed: u64) -> Result<AnonymousGame> {
    if n < 2 || m < 1 {
        return Err(Error::InvalidGame("need n ≥ 2 players and m ≥ 1 strategies".into()));
    }
    let dists = DistIndex::new(n as u32 - 1, m);
    if dists.len() as u64 > MAX_DIST_COUNT {
        return Err(Error::BudgetExceeded {
            required: dists.len() as u128,
            budget: MAX_DIST_COUNT,
        });
    }
    // Process ranks by distance from the start vertex (BFS layers by ‖·‖₁/2).
    let start = {
        let mut c = vec![0u32; m];
        c[0] = n as u32 - 1;
        c
    };
    let mut order: Vec<usize> = (0..dists.len()).collect();
    let dist_from_start: Vec<u64> = dists
        .iter()
        .map(|d| half_l1_counts(d, &start) as u64)
        .collect();
    order.sort_by_key(|&r| (dist_from_start[r], r));

    let mut rng = rng_from_seed(seed);
    let mut f = vec![0.0f64; n * m * dists.len()];
    for i in 0..n {
        for s in 0..m {
            let col_base = i * m * dists.len() + s * dists.len();
            let mut assigned: Vec<usize> = Vec::with_capacity(dists.len());
            for &rank in &order {
                let v = if assigned.is_empty() {
                    rng.gen_range(0.0..1.0)
                } else {
                    // Perturb the nearest assigned point, then clamp into the
                    // interval every assigned point allows.
                    let d = dists.counts(rank);
                    let nearest = *assigned
                        .iter()
                        .min_by(|&&a, &&b| {
                            half_l1_counts(dists.counts(a), d)
                                .partial_cmp(&half_l1_counts(dists.counts(b), d))
                                .unwrap()
                        })
                        .unwrap();
                    let proposal = f[col_base + nearest] + rng.gen_range(-delta..=delta);
                    let mut lo = f64::NEG_INFINITY;
                    let mut hi = f64::INFINITY;
                    for &a in &assigned {
                        let dist = half_l1_counts(dists.counts(a), d);
                        lo = lo.max(f[col_base + a] - delta * dist);
                        hi = hi.min(f[col_base + a] + delta * dist);
                    }
                    if lo > hi {
                        // Rounding can invert a near-tight interval; its
                        // midpoint violates each constraint by ≤ the float
                        // error, well inside the validation tolerance.
                        0.5 * (lo + hi)
                    } else {
                        proposal.clamp(lo, hi)
                    }
                };
                f[col_base + rank] = v;
                assigned.push(rank);
            }
        }
    }
    AnonymousGame::new(n, m, delta, f, u64::MAX)
}

/// Distribution of opponent strategy counts under independent mixtures:
/// the exact probability mass function over `D_t(S)` (t = number of
/// opponents), indexed by colex rank. Deterministic summation order.
pub fn opponent_count_pmf(m: usize, opponents: &[&[f64]]) -> Vec<f64> {
    let mut idx = DistIndex::new(0, m);
    let mut pmf = vec![1.0f64];
    for p in opponents {
        debug_assert_eq!(p.len(), m);
        let next = DistIndex::new(idx.mass() + 1, m);
        let mut out = vec![0.0f64; next.len()];
        let mut cc = vec![0u32; m];
        for (r, c) in idx.iter().enumerate() {
            let w = pmf[r];
            if w == 0.0 {
                continue;
            }
            cc.copy_from_slice(c);
            for s in 0..m {
                if p[s] == 0.0 {
                    continue;
                }
                cc[s] += 1;
                out[next.rank(&cc).unwrap()] += w * p[s];
                cc[s] -= 1;
            }
        }
        idx = next;
        pmf = out;
    }
    pmf
}

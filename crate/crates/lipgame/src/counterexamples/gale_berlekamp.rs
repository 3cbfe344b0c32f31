use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{Budget, Game, GameKind, GameSpec, Payoffs};
use crate::rng::{rng_from_seed, sub_rng};

/// A k×k ±1 matrix. Strategy encoding everywhere: index 0 ↦ +1, 1 ↦ −1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMatrix {
    k: usize,
    /// Row-major entries, each +1 or −1.
    rows: Vec<i8>,
}

impl SignMatrix {
    pub fn from_rows(k: usize, rows: &[Vec<i8>]) -> Result<SignMatrix> {
        if k == 0 || rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::ShapeMismatch(format!("expected {k}×{k} matrix")));
        }
        if rows.iter().flatten().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidGame("matrix entries must be ±1".into()));
        }
        Ok(SignMatrix {
            k,
            rows: rows.iter().flatten().copied().collect(),
        })
    }

    /// Uniform random ±1 matrix (no discrepancy verification).
    pub fn random(k: usize, seed: u64) -> Result<SignMatrix> {
        if k == 0 {
            return Err(Error::InvalidGame("k must be positive".into()));
        }
        let mut rng = rng_from_seed(seed);
        let rows = (0..k * k)
            .map(|_| if rng.gen::<bool>() { 1i8 } else { -1i8 })
            .collect();
        Ok(SignMatrix { k, rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Entry m_ij as a signed integer.
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.rows[i * self.k + j] as i64
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        self.rows.chunks(self.k).map(|r| r.to_vec()).collect()
    }
}

/// The truncation K(t): clamp to [−1, 1].
pub fn truncate(t: f64) -> f64 {
    t.clamp(-1.0, 1.0)
}

#[inline]
fn sign_of(strategy: usize) -> i64 {
    1 - 2 * strategy as i64
}

/// Integer core of the payoffs: for female `i < k` this is
/// `x_i·Σ_j m_ij·y_j`, for male `j ≥ k` it is `−y_j·Σ_i m_ij·x_i`.
pub(crate) fn gb_core(m: &SignMatrix, i: usize, a: &[usize]) -> i64 {
    let k = m.k;
    if i < k {
        let x = sign_of(a[i]);
        let s: i64 = (0..k).map(|j| m.entry(i, j) * sign_of(a[k + j])).sum();
        x * s
    } else {
        let j = i - k;
        let y = sign_of(a[i]);
        let s: i64 = (0..k).map(|r| m.entry(r, j) * sign_of(a[r])).sum();
        -y * s
    }
}

/// Untruncated payoff u_i / v_j (exposed for the exact zero-sum tests).
pub fn gb_untruncated(m: &SignMatrix, delta: f64, i: usize, a: &[usize]) -> f64 {
    delta * gb_core(m, i, a) as f64
}

pub(crate) fn gb_payoff(m: &SignMatrix, delta: f64, i: usize, a: &[usize]) -> f64 {
    truncate(gb_untruncated(m, delta, i, a))
}

/// The bilinear form `Σ_ij m_ij·x_i·y_j` as an exact integer;
/// `Σ_i u_i = δ·B = −Σ_j v_j` (the zero-sum identity).
pub fn gb_bilinear(m: &SignMatrix, a: &[usize]) -> i64 {
    let k = m.k;
    let mut acc = 0i64;
    for i in 0..k {
        let x = sign_of(a[i]);
        for j in 0..k {
            acc += m.entry(i, j) * x * sign_of(a[k + j]);
        }
    }
    acc
}

/// 2k-player game: k females choose the rows' signs, k males the columns'.
/// Payoffs are the truncated u_i / v_j; δ defaults to 20/√k upstream.
pub fn build_gb_game(m: SignMatrix, delta: f64) -> Game {
    let k = m.k;
    let spec = GameSpec::GaleBerlekamp {
        k,
        delta: Some(delta),
        seed: None,
        matrix: Some(m.to_rows()),
    };
    Game::from_parts(
        vec![2; 2 * k],
        GameKind::GaleBerlekamp,
        Payoffs::GaleBerlekamp {
            matrix: Arc::new(m),
            delta,
        },
        Some(spec),
    )
}

#[derive(Clone, Copy, Debug)]
pub enum DiscrepancyMode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscrepancyOutcome {
    /// True iff every enumerated/sampled x̄ has more than k/3 columns with
    /// |(x̄M)_j| > √k/20.
    pub ok: bool,
    /// The x̄ with the fewest qualifying columns seen (±1 entries).
    pub worst_x: Vec<i8>,
    pub worst_count: usize,
}

/// Check the discrepancy property: for every row-sign vector x̄,
/// `#{j : |(x̄M)_j| > √k/20} > k/3`. Both comparisons are exact integer
/// arithmetic (`400·z² > k` and `3·count > k`), and the x̄ → −x̄ symmetry
/// halves the exhaustive work.
pub fn verify_discrepancy(
    m: &SignMatrix,
    mode: DiscrepancyMode,
    budget: Budget,
) -> Result<DiscrepancyOutcome> {
    let k = m.k;
    match mode {
        DiscrepancyMode::Exhaustive => {
            if k >= 63 {
                return Err(Error::BudgetExceeded {
                    required: u128::MAX,
                    budget,
                });
            }
            let total: u128 = 1u128 << (k - 1).min(127);
            if (1u128 << k) > budget as u128 {
                return Err(Error::BudgetExceeded {
                    required: 1u128 << k,
                    budget,
                });
            }
            // Fix x_0 = +1 (code bit k−1 unused); walk Gray codes per chunk.
            let chunks = crate::game_core::chunk_ranges(total, 8 * rayon::current_num_threads());
            let (worst_count, worst_code) = chunks
                .into_par_iter()
                .map(|(lo, hi)| scan_gray_range(m, lo as u64, hi as u64))
                .reduce(
                    || (usize::MAX, 0u64),
                    |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
                );
            let gray = worst_code ^ (worst_code >> 1);
            let worst_x: Vec<i8> = (0..k)
                .map(|i| if i > 0 && gray >> (i - 1) & 1 == 1 { -1 } else { 1 })
                .collect();
            Ok(DiscrepancyOutcome {
                ok: 3 * worst_count > k,
                worst_x,
                worst_count,
            })
        }
        DiscrepancyMode::MonteCarlo { samples, seed } => {
            let workers = crate::game_core::chunk_ranges(
                samples.max(1) as u128,
                8 * rayon::current_num_threads(),
            );
            let (worst_count, worst_x) = workers
                .into_par_iter()
                .enumerate()
                .map(|(w, (lo, hi))| {
                    let mut rng = sub_rng(seed, w as u64);
                    let mut best: (usize, Vec<i8>) = (usize::MAX, Vec::new());
                    for _ in lo..hi {
                        let x: Vec<i8> =
                            (0..k).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
                        let c = qualifying_columns(m, &x);
                        if c < best.0 {
                            best = (c, x);
                        }
                    }
                    best
                })
                .reduce(
                    || (usize::MAX, Vec::new()),
                    |a, b| if b.0 < a.0 { b } else { a },
                );
            Ok(DiscrepancyOutcome {
                ok: 3 * worst_count > k,
                worst_x,
                worst_count,
            })
        }
    }
}

fn qualifying_columns(m: &SignMatrix, x: &[i8]) -> usize {
    let k = m.k;
    (0..k)
        .filter(|&j| {
            let z: i64 = (0..k).map(|i| m.entry(i, j) * x[i] as i64).sum();
            400 * z * z > k as i64
        })
        .count()
}

/// Serial Gray-code walk over codes `lo..hi` (x_0 fixed to +1; code bit t
/// controls x_{t+1}). Returns (min qualifying-column count, its code).
fn scan_gray_range(m: &SignMatrix, lo: u64, hi: u64) -> (usize, u64) {
    let k = m.k;
    let gray0 = lo ^ (lo >> 1);
    let mut x: Vec<i64> = (0..k)
        .map(|i| if i > 0 && gray0 >> (i - 1) & 1 == 1 { -1 } else { 1 })
        .collect();
    let mut z: Vec<i64> = (0..k)
        .map(|j| (0..k).map(|i| m.entry(i, j) * x[i]).sum())
        .collect();
    let mut best = (usize::MAX, lo);
    for code in lo..hi {
        if code != lo {
            // Gray step code−1 → code flips code bit tz(code), i.e. x_{tz+1}.
            let t = code.trailing_zeros() as usize + 1;
            x[t] = -x[t];
            for j in 0..k {
                z[j] += 2 * m.entry(t, j) * x[t];
            }
        }
        let count = z.iter().filter(|&&v| 400 * v * v > k as i64).count();
        if count < best.0 {
            best = (count, code);
        }
    }
    best
}

/// Resample uniform ±1 matrices until one passes exhaustive discrepancy
/// verification; returns the matrix and the number of attempts used.
pub fn find_gb_matrix(
    k: usize,
    seed: u64,
    max_attempts: u64,
    budget: Budget,
) -> Result<(SignMatrix, u64)> {
    for attempt in 0..max_attempts {
        let m = SignMatrix::random(k, crate::rng::derive_seed(seed, attempt))?;
        if verify_discrepancy(&m, DiscrepancyMode::Exhaustive, budget)?.ok {
            return Ok((m, attempt + 1));
        }
    }
    Err(Error::ExhaustedAttempts {
        attempts: max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::{lipschitz_constant_exact, profile_count, profile_from_rank};
    use crate::DEFAULT_BUDGET;

    #[test]
    fn truncate_branches() {
        assert_eq!(truncate(0.5), 0.5);
        assert_eq!(truncate(-3.0), -1.0);
        assert_eq!(truncate(1.0), 1.0);
    }

    #[test]
    fn zero_sum_identity_exact() {
        let m = SignMatrix::random(4, 5).unwrap();
        let delta = 20.0 / 2.0;
        let mut rng = rng_from_seed(8);
        for _ in 0..1000 {
            let a: Vec<usize> = (0..8).map(|_| rng.gen_range(0..2usize)).collect();
            let females: i64 = (0..4).map(|i| gb_core(&m, i, &a)).sum();
            let males: i64 = (4..8).map(|i| gb_core(&m, i, &a)).sum();
            assert_eq!(females, -males);
            assert_eq!(females, gb_bilinear(&m, &a));
            let su: f64 = (0..4).map(|i| gb_untruncated(&m, delta, i, &a)).sum();
            let sv: f64 = (4..8).map(|i| gb_untruncated(&m, delta, i, &a)).sum();
            assert_eq!(su, -sv);
        }
    }

    #[test]
    fn proof_chain_some_female_loses_against_male_best_responses() {
        // For a verified matrix at odd k, every column sum is odd and the
        // male best response is unique: y_j = −sign((x̄M)_j). For every x̄,
        // the males collect Σ_j v_j > k/6 and some female ends below −1/6.
        let k = 7;
        let (m, _) = find_gb_matrix(k, 21, 1000, DEFAULT_BUDGET).unwrap();
        let delta = 20.0 / (k as f64).sqrt();
        let g = build_gb_game(m.clone(), delta);
        for bits in 0u32..1 << k {
            let mut a = vec![0usize; 2 * k];
            for i in 0..k {
                a[i] = ((bits >> i) & 1) as usize;
            }
            for j in 0..k {
                let z: i64 = (0..k).map(|r| m.entry(r, j) * (1 - 2 * a[r] as i64)).sum();
                assert_ne!(z, 0, "odd k keeps column sums odd");
                // v_j = K(−δ·y_j·z): maximized by y = −sign(z), i.e. the
                // strategy index 0 ↦ +1 exactly when z < 0.
                a[k + j] = if z > 0 { 1 } else { 0 };
            }
            let male_total: f64 = (k..2 * k).map(|i| g.payoff(i, &a)).sum();
            assert!(male_total > k as f64 / 6.0);
            let female_min = (0..k)
                .map(|i| g.payoff(i, &a))
                .fold(f64::INFINITY, f64::min);
            assert!(female_min < -1.0 / 6.0, "x̄={bits:#09b}: min {female_min}");
        }
    }

    #[test]
    fn own_flip_negates_untruncated_payoff() {
        let m = SignMatrix::random(3, 2).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let mut a: Vec<usize> = (0..6).map(|_| rng.gen_range(0..2usize)).collect();
            for i in 0..6 {
                let before = gb_core(&m, i, &a);
                a[i] = 1 - a[i];
                assert_eq!(gb_core(&m, i, &a), -before);
                a[i] = 1 - a[i];
            }
        }
    }

    #[test]
    fn payoffs_bounded_and_lipschitz_at_k3() {
        let k = 3;
        let delta = 20.0 / (k as f64).sqrt();
        let (m, _) = find_gb_matrix(k, 1, 100, DEFAULT_BUDGET).unwrap();
        let g = build_gb_game(m, delta);
        let counts = g.strategy_counts().to_vec();
        let total = profile_count(&counts);
        for rank in 0..total {
            let a = profile_from_rank(&counts, rank);
            for i in 0..2 * k {
                let p = g.payoff(i, &a);
                assert!((-1.0..=1.0).contains(&p));
            }
        }
        let d = lipschitz_constant_exact(&g, DEFAULT_BUDGET).unwrap();
        assert!(d <= 2.0 * delta + 1e-12);
    }

    #[test]
    fn odd_small_k_always_passes_discrepancy() {
        // Odd k < 400: every column sum is odd, hence nonzero, and
        // 400·z² ≥ 400 > k, so all k columns qualify.
        for seed in 0..5 {
            let m = SignMatrix::random(9, seed).unwrap();
            let out = verify_discrepancy(&m, DiscrepancyMode::Exhaustive, DEFAULT_BUDGET).unwrap();
            assert!(out.ok);
            assert_eq!(out.worst_count, 9);
        }
    }

    #[test]
    fn all_ones_even_k_fails() {
        let rows = vec![vec![1i8; 4]; 4];
        let m = SignMatrix::from_rows(4, &rows).unwrap();
        let out = verify_discrepancy(&m, DiscrepancyMode::Exhaustive, DEFAULT_BUDGET).unwrap();
        assert!(!out.ok);
        assert_eq!(out.worst_count, 0);
        // The worst x̄ indeed zeroes every column sum.
        let x = out.worst_x;
        assert_eq!(x.iter().map(|&v| v as i64).sum::<i64>(), 0);
    }

    #[test]
    fn exhaustive_matches_naive_oracle() {
        // Independent oracle: enumerate all 2^k vectors without Gray codes
        // or the ±x̄ symmetry.
        for seed in [3u64, 14] {
            let k = 10;
            let m = SignMatrix::random(k, seed).unwrap();
            let fast = verify_discrepancy(&m, DiscrepancyMode::Exhaustive, DEFAULT_BUDGET).unwrap();
            let mut naive_ok = true;
            let mut naive_worst = usize::MAX;
            for bits in 0u64..1 << k {
                let x: Vec<i8> = (0..k)
                    .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
                    .collect();
                let c = qualifying_columns(&m, &x);
                naive_worst = naive_worst.min(c);
                naive_ok &= 3 * c > k;
            }
            assert_eq!(fast.ok, naive_ok);
            assert_eq!(fast.worst_count, naive_worst);
        }
    }

    #[test]
    fn monte_carlo_mode_agrees_on_easy_cases() {
        let m = SignMatrix::random(9, 0).unwrap();
        let out = verify_discrepancy(
            &m,
            DiscrepancyMode::MonteCarlo {
                samples: 500,
                seed: 2,
            },
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(out.ok);
    }

    #[test]
    fn budget_refused_for_huge_k() {
        let m = SignMatrix::random(30, 0).unwrap();
        assert!(matches!(
            verify_discrepancy(&m, DiscrepancyMode::Exhaustive, 1 << 20),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn spec_round_trip_with_matrix() {
        let (m, _) = find_gb_matrix(5, 7, 100, DEFAULT_BUDGET).unwrap();
        let g = build_gb_game(m.clone(), 20.0 / 5f64.sqrt());
        let json = serde_json::to_string(g.spec().unwrap()).unwrap();
        let spec: GameSpec = serde_json::from_str(&json).unwrap();
        let g2 = Game::from_spec(&spec, DEFAULT_BUDGET).unwrap();
        let a = vec![0usize; 10];
        for i in 0..10 {
            assert_eq!(g.payoff(i, &a).to_bits(), g2.payoff(i, &a).to_bits());
        }
    }
}

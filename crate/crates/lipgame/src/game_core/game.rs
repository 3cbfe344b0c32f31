use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anonymous::AnonymousGame;
use crate::counterexamples::{self, SignMatrix};
use crate::error::{Error, Result};
use crate::game_core::polymatrix::PolymatrixTables;
use crate::replication;
use crate::rng::Rng;

/// Cell budget for exhaustive operations.
pub type Budget = u64;

/// Which family a [`Game`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Explicit,
    GaleBerlekamp,
    MassMatchingPennies,
    Anonymous,
    Restaurant,
    Replicated,
    Polymatrix,
}

/// Serializable description of a game, as read from / written to JSON.
///
/// `explicit` payoffs are one flat array per player (player-major), each
/// row-major over profiles with the last player's strategy varying fastest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    Explicit {
        n: usize,
        strategies: Vec<usize>,
        payoffs: Vec<Vec<f64>>,
    },
    GaleBerlekamp {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// Rows of ±1 entries. Absent means: sample uniformly from `seed`
        /// (without any discrepancy verification).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<i8>>>,
    },
    MassMp {
        k: usize,
    },
    Restaurant {
        n: usize,
        delta: f64,
    },
    Polymatrix {
        n: usize,
        m: usize,
        delta: f64,
        seed: u64,
    },
    Replicated {
        base: Box<GameSpec>,
        #[serde(rename = "L")]
        l: usize,
    },
    Anonymous {
        n: usize,
        m: usize,
        delta: f64,
        #[serde(rename = "F")]
        f: Vec<f64>,
    },
}

/// One strategy index per player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PureProfile(pub Vec<usize>);

impl PureProfile {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One probability vector per player (product structure, no correlation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedProfile {
    pub distributions: Vec<Vec<f64>>,
}

impl MixedProfile {
    /// Uniform mixture for every player of `g`.
    pub fn uniform(g: &Game) -> Self {
        MixedProfile {
            distributions: g
                .strategy_counts()
                .iter()
                .map(|&m| vec![1.0 / m as f64; m])
                .collect(),
        }
    }

    /// Point mass on the pure profile `a`.
    pub fn degenerate(a: &PureProfile, strategy_counts: &[usize]) -> Self {
        MixedProfile {
            distributions: a
                .0
                .iter()
                .zip(strategy_counts)
                .map(|(&s, &m)| {
                    let mut v = vec![0.0; m];
                    v[s] = 1.0;
                    v
                })
                .collect(),
        }
    }

    pub fn validate(&self, g: &Game) -> Result<()> {
        if self.distributions.len() != g.num_players() {
            return Err(Error::InvalidMixed(format!(
                "expected {} distributions, got {}",
                g.num_players(),
                self.distributions.len()
            )));
        }
        for (i, (d, &m)) in self
            .distributions
            .iter()
            .zip(g.strategy_counts())
            .enumerate()
        {
            if d.len() != m {
                return Err(Error::InvalidMixed(format!(
                    "player {i}: expected {m} probabilities, got {}",
                    d.len()
                )));
            }
            if d.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::InvalidMixed(format!(
                    "player {i}: negative or NaN probability"
                )));
            }
            let sum: f64 = d.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMixed(format!(
                    "player {i}: probabilities sum to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Draw one pure profile (inverse-CDF per player, ascending index).
    pub fn sample(&self, rng: &mut Rng) -> Vec<usize> {
        use rand::Rng as _;
        self.distributions
            .iter()
            .map(|d| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (s, &p) in d.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return s;
                    }
                }
                d.len() - 1
            })
            .collect()
    }
}

pub(crate) enum Payoffs {
    Explicit {
        /// `tables[i]` is flat over profiles; last player varies fastest.
        tables: Vec<Vec<f64>>,
        strides: Vec<usize>,
    },
    Polymatrix(Arc<PolymatrixTables>),
    GaleBerlekamp {
        matrix: Arc<SignMatrix>,
        delta: f64,
    },
    MassMp {
        k: usize,
    },
    Anonymous(Arc<AnonymousGame>),
    Replicated {
        base: Arc<Game>,
        l: usize,
    },
    /// Lazy η-reduction wrapper: `g_i(a) = f_i(a) − f_i(anchor_i, a_{−i})`.
    Reduced {
        base: Arc<Game>,
        anchors: Vec<usize>,
    },
}

/// A finite normal-form game: a payoff oracle over `n` players with
/// `strategy_counts[i]` strategies each. Immutable after construction and
/// safe to evaluate concurrently.
pub struct Game {
    strategy_counts: Vec<usize>,
    kind: GameKind,
    pub(crate) payoffs: Payoffs,
    spec: Option<GameSpec>,
}

impl std::fmt::Debug for Game {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Game")
            .field("strategy_counts", &self.strategy_counts)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl Game {
    /// Build an explicit-table game. Total table size must fit `budget`.
    pub fn explicit(strategy_counts: Vec<usize>, tables: Vec<Vec<f64>>, budget: Budget) -> Result<Game> {
        let n = strategy_counts.len();
        if n == 0 || strategy_counts.iter().any(|&m| m == 0) {
            return Err(Error::InvalidGame(
                "need at least one player and one strategy per player".into(),
            ));
        }
        let cells = profile_count(&strategy_counts)
            .checked_mul(n as u128)
            .ok_or(Error::BudgetExceeded {
                required: u128::MAX,
                budget,
            })?;
        check_budget(cells, budget)?;
        let per = profile_count(&strategy_counts) as usize;
        if tables.len() != n || tables.iter().any(|t| t.len() != per) {
            return Err(Error::ShapeMismatch(format!(
                "expected {n} tables of {per} entries"
            )));
        }
        let strides = strides_of(&strategy_counts);
        Ok(Game {
            spec: Some(GameSpec::Explicit {
                n,
                strategies: strategy_counts.clone(),
                payoffs: tables.clone(),
            }),
            strategy_counts,
            kind: GameKind::Explicit,
            payoffs: Payoffs::Explicit { tables, strides },
        })
    }

    pub(crate) fn from_parts(
        strategy_counts: Vec<usize>,
        kind: GameKind,
        payoffs: Payoffs,
        spec: Option<GameSpec>,
    ) -> Game {
        Game {
            strategy_counts,
            kind,
            payoffs,
            spec,
        }
    }

    /// Construct a game from its serializable description.
    pub fn from_spec(spec: &GameSpec, budget: Budget) -> Result<Game> {
        match spec {
            GameSpec::Explicit {
                n,
                strategies,
                payoffs,
            } => {
                if *n != strategies.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "n = {n} but {} strategy counts given",
                        strategies.len()
                    )));
                }
                Game::explicit(strategies.clone(), payoffs.clone(), budget)
            }
            GameSpec::GaleBerlekamp {
                k,
                delta,
                seed,
                matrix,
            } => {
                let m = match matrix {
                    Some(rows) => SignMatrix::from_rows(*k, rows)?,
                    None => {
                        let seed = seed.ok_or_else(|| {
                            Error::InvalidGame(
                                "gale_berlekamp spec needs either a matrix or a seed".into(),
                            )
                        })?;
                        SignMatrix::random(*k, seed)?
                    }
                };
                let delta = delta.unwrap_or_else(|| 20.0 / (*k as f64).sqrt());
                Ok(counterexamples::build_gb_game(m, delta))
            }
            GameSpec::MassMp { k } => counterexamples::build_mass_mp_game(*k),
            GameSpec::Restaurant { n, delta } => {
                let ag = counterexamples::build_restaurant_game(*n, *delta, budget)?;
                Ok(Game::from_anonymous(Arc::new(ag), GameKind::Restaurant))
            }
            GameSpec::Polymatrix { n, m, delta, seed } => {
                Ok(super::polymatrix_random(*n, *m, *delta, *seed))
            }
            GameSpec::Replicated { base, l } => {
                let base = Game::from_spec(base, budget)?;
                replication::replicate(Arc::new(base), *l)
            }
            GameSpec::Anonymous { n, m, delta, f } => {
                let ag = AnonymousGame::new(*n, *m, *delta, f.clone(), budget)?;
                Ok(Game::from_anonymous(Arc::new(ag), GameKind::Anonymous))
            }
        }
    }

    /// Wrap an [`AnonymousGame`] as a plain n-player payoff oracle.
    pub fn from_anonymous(ag: Arc<AnonymousGame>, kind: GameKind) -> Game {
        let spec = ag.to_spec();
        Game {
            strategy_counts: vec![ag.m(); ag.n()],
            kind,
            payoffs: Payoffs::Anonymous(ag),
            spec: Some(spec),
        }
    }

    pub fn num_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    /// The serializable description, when one exists for this game.
    pub fn spec(&self) -> Option<&GameSpec> {
        self.spec.as_ref()
    }

    /// The anonymous structure behind this game, if it has one.
    pub fn as_anonymous(&self) -> Option<&Arc<AnonymousGame>> {
        match &self.payoffs {
            Payoffs::Anonymous(ag) => Some(ag),
            _ => None,
        }
    }

    pub fn validate_profile(&self, a: &[usize]) -> Result<()> {
        if a.len() != self.num_players() {
            return Err(Error::InvalidProfile(format!(
                "expected {} strategies, got {}",
                self.num_players(),
                a.len()
            )));
        }
        for (i, (&s, &m)) in a.iter().zip(&self.strategy_counts).enumerate() {
            if s >= m {
                return Err(Error::InvalidStrategy {
                    player: i,
                    strategy: s,
                    count: m,
                });
            }
        }
        Ok(())
    }

    /// Payoff `f_i(a)`. Pure: identical inputs always yield identical outputs.
    pub fn payoff(&self, i: usize, a: &[usize]) -> f64 {
        debug_assert!(self.validate_profile(a).is_ok() && i < self.num_players());
        match &self.payoffs {
            Payoffs::Explicit { tables, strides } => {
                let rank: usize = a.iter().zip(strides).map(|(&s, &st)| s * st).sum();
                tables[i][rank]
            }
            Payoffs::Polymatrix(t) => t.payoff(i, a),
            Payoffs::GaleBerlekamp { matrix, delta } => {
                counterexamples::gb_payoff(matrix, *delta, i, a)
            }
            Payoffs::MassMp { k } => counterexamples::mass_mp_payoff(*k, i, a),
            Payoffs::Anonymous(ag) => ag.payoff_profile(i, a),
            Payoffs::Replicated { base, l } => replication::replicated_payoff(base, *l, i, a),
            Payoffs::Reduced { base, anchors } => {
                let mut b = a.to_vec();
                b[i] = anchors[i];
                base.payoff(i, a) - base.payoff(i, &b)
            }
        }
    }

    /// Payoffs `f_i(d, a_{−i})` for every own strategy `d`, ascending.
    ///
    /// Families whose payoff depends on opponents only through counts
    /// (anonymous, replicated) compute the counts once per call.
    pub fn deviation_row(&self, i: usize, a: &[usize]) -> Vec<f64> {
        match &self.payoffs {
            Payoffs::Anonymous(ag) => ag.deviation_row(i, a),
            Payoffs::Replicated { base, l } => replication::replicated_deviation_row(base, *l, i, a),
            Payoffs::Reduced { base, anchors } => {
                let mut row = base.deviation_row(i, a);
                let anchor = row[anchors[i]];
                for v in &mut row {
                    *v -= anchor;
                }
                row
            }
            _ => {
                let mut b = a.to_vec();
                (0..self.strategy_counts[i])
                    .map(|d| {
                        b[i] = d;
                        self.payoff(i, &b)
                    })
                    .collect()
            }
        }
    }

    /// [`Self::deviation_row`] for every player. Count-structured families
    /// share one counting pass (anonymous) or one row per group (replicated).
    pub fn deviation_table(&self, a: &[usize]) -> Vec<Vec<f64>> {
        match &self.payoffs {
            Payoffs::Anonymous(ag) => ag.deviation_table(a),
            Payoffs::Replicated { base, l } => {
                replication::replicated_deviation_table(base, *l, a)
            }
            _ => (0..self.num_players())
                .map(|i| self.deviation_row(i, a))
                .collect(),
        }
    }
}

/// `Π_i strategy_counts[i]` as a u128 (no overflow at sane sizes).
pub fn profile_count(strategy_counts: &[usize]) -> u128 {
    strategy_counts
        .iter()
        .fold(1u128, |acc, &m| acc.saturating_mul(m as u128))
}

/// Profile at lexicographic `rank` (player 0 most significant).
pub fn profile_from_rank(strategy_counts: &[usize], rank: u128) -> Vec<usize> {
    let mut rest = rank;
    let mut out = vec![0usize; strategy_counts.len()];
    for (j, &m) in strategy_counts.iter().enumerate().rev() {
        out[j] = (rest % m as u128) as usize;
        rest /= m as u128;
    }
    out
}

/// Advance `a` to the lexicographic successor; false after the last profile.
pub(crate) fn advance_profile(strategy_counts: &[usize], a: &mut [usize]) -> bool {
    for j in (0..a.len()).rev() {
        a[j] += 1;
        if a[j] < strategy_counts[j] {
            return true;
        }
        a[j] = 0;
    }
    false
}

pub(crate) fn strides_of(strategy_counts: &[usize]) -> Vec<usize> {
    let n = strategy_counts.len();
    let mut strides = vec![1usize; n];
    for j in (0..n.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * strategy_counts[j + 1];
    }
    strides
}

pub(crate) fn check_budget(required: u128, budget: Budget) -> Result<()> {
    if required > budget as u128 {
        Err(Error::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

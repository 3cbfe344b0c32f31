//! Command-line front end: loads JSON game specs, runs the library
//! operations, and emits JSON reports. Exit codes: 0 success, 1 not-found
//! results (no equilibrium / failed criteria), 2 input errors, 3 budget
//! errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lipgame::anonymous::anonymous_purify;
use lipgame::counterexamples::{
    find_gb_matrix, verify_discrepancy, DiscrepancyMode, SignMatrix,
};
use lipgame::error::Error;
use lipgame::game_core::{
    delta_anonymous, delta_main, delta_trivial, eta_constant_exact, exhaustive_pure_search,
    lipschitz_constant_estimate, lipschitz_constant_exact,
};
use lipgame::purification::{certificate, default_max_tries, self_purify};
use lipgame::replication::{nash_via_replication, ReplicationMethod};
use lipgame::report::Report;
use lipgame::{Budget, Game, GameSpec, MixedProfile, DEFAULT_BUDGET, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "lipgame", version, about = "Analysis and purification of Lipschitz games")]
struct Cli {
    /// Cap on enumeration budgets (cells). Defaults to LIPGAME_BUDGET or 10^7.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Cap on the worker thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GameArg {
    /// Path to a JSON game spec.
    #[arg(long)]
    game: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LipschitzMode {
    Exact,
    Estimate,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    SelfPurify,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleKind {
    Gb,
    MassMp,
    Restaurant,
}

#[derive(Subcommand)]
enum Command {
    /// Lipschitz constant δ(G), exactly or by sampling.
    Lipschitz {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, value_enum, default_value = "exact")]
        mode: LipschitzMode,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, required_if_eq("mode", "estimate"))]
        seed: Option<u64>,
    },
    /// Deviation-gain constant η(G) (exact enumeration).
    Eta {
        #[command(flatten)]
        game: GameArg,
    },
    /// Exhaustive scan for pure ε-equilibria. Exit 1 when none exist.
    FindPure {
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Self-purification: sample from a mixed profile until a pure
    /// ε-equilibrium candidate passes every expectation test.
    Purify {
        #[command(flatten)]
        game: GameArg,
        /// JSON file with one distribution per player; omit for uniform.
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        /// Defaults to ceil(10 / success_lower_bound) from the certificate.
        #[arg(long)]
        max_tries: Option<u64>,
    },
    /// Purification success certificate from (ε, δ, n, m) alone.
    Certificate {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Emit a game spec for one of the counterexample families.
    Example {
        #[arg(long, value_enum)]
        kind: ExampleKind,
        /// Matrix dimension (gb, mass-mp).
        #[arg(long)]
        k: Option<usize>,
        /// Half the opponent count (restaurant: 2n+1 players).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        /// Matrix search seed (gb).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        max_attempts: u64,
    },
    /// Check the Gale–Berlekamp discrepancy property of a gb game spec.
    VerifyDiscrepancy {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: VerifyMode,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, required_if_eq("mode", "monte-carlo"))]
        seed: Option<u64>,
    },
    /// Solve the auxiliary game of an anonymous spec and round the solution
    /// to a pure profile with the Shapley–Folkman walk.
    AnonymousPurify {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Replicate a base game, find a pure ε-equilibrium of the replica, and
    /// project it back to a mixed ε-equilibrium of the base.
    Replicate {
        #[command(flatten)]
        game: GameArg,
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "self-purify")]
        method: Method,
        #[arg(long)]
        seed: u64,
        /// Base mixed equilibrium file for self-purify; omit for uniform.
        #[arg(long)]
        mu: Option<PathBuf>,
    },
    /// Run a named acceptance experiment preset.
    Experiment {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convenience: the three δ thresholds at given (ε, n, m).
    Thresholds {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

fn load_game(path: &PathBuf, budget: Budget) -> Result<Game, Error> {
    let text = std::fs::read_to_string(path)?;
    let spec: GameSpec = serde_json::from_str(&text)?;
    Game::from_spec(&spec, budget)
}

fn load_mu(path: &Option<PathBuf>, g: &Game) -> Result<MixedProfile, Error> {
    match path {
        None => Ok(MixedProfile::uniform(g)),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let distributions: Vec<Vec<f64>> = serde_json::from_str(&text)?;
            let mu = MixedProfile { distributions };
            mu.validate(g)?;
            Ok(mu)
        }
    }
}

/// Exit code contract: 1 not-found, 2 input, 3 budget.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BudgetExceeded { .. } => 3,
        Error::NoEquilibriumFound(_) | Error::ExhaustedAttempts { .. } => 1,
        _ => 2,
    }
}

fn run(cli: &Cli, budget: Budget) -> Result<(Report, u8), Error> {
    match &cli.command {
        Command::Lipschitz {
            game,
            mode,
            samples,
            seed,
        } => {
            let g = load_game(&game.game, budget)?;
            let (value, inputs) = match mode {
                LipschitzMode::Exact => (
                    lipschitz_constant_exact(&g, budget)?,
                    json!({"game": &game.game, "mode": "exact"}),
                ),
                LipschitzMode::Estimate => {
                    let seed = seed.expect("clap enforces --seed for estimate");
                    (
                        lipschitz_constant_estimate(&g, *samples, seed),
                        json!({"game": &game.game, "mode": "estimate", "samples": samples, "seed": seed}),
                    )
                }
            };
            Ok((Report::new("lipschitz", inputs, json!({"delta": value})), 0))
        }
        Command::Eta { game } => {
            let g = load_game(&game.game, budget)?;
            let eta = eta_constant_exact(&g, budget)?;
            Ok((
                Report::new("eta", json!({"game": &game.game}), json!({"eta": eta})),
                0,
            ))
        }
        Command::FindPure { game, eps, tol } => {
            let g = load_game(&game.game, budget)?;
            let out = exhaustive_pure_search(&g, *eps, *tol, budget)?;
            let code = if out.count == 0 { 1 } else { 0 };
            Ok((
                Report::new(
                    "find-pure",
                    json!({"game": &game.game, "eps": eps, "tol": tol}),
                    json!({"first": out.first, "count": out.count.to_string()}),
                ),
                code,
            ))
        }
        Command::Purify {
            game,
            mu,
            eps,
            seed,
            max_tries,
        } => {
            let g = load_game(&game.game, budget)?;
            let mu = load_mu(mu, &g)?;
            let n = g.num_players();
            let m = *g.strategy_counts().iter().max().unwrap();
            let delta = lipschitz_constant_exact(&g, budget)
                .unwrap_or_else(|_| lipschitz_constant_estimate(&g, 10_000, *seed));
            let cert = certificate(*eps, delta.max(f64::MIN_POSITIVE), n, m)?;
            let tries = max_tries.unwrap_or_else(|| default_max_tries(&cert));
            let out = self_purify(&g, &mu, *eps, tries, *seed, budget)?;
            let code = if out.profile.is_some() { 0 } else { 1 };
            Ok((
                Report::new(
                    "purify",
                    json!({"game": &game.game, "eps": eps, "seed": seed, "max_tries": tries}),
                    json!({"outcome": out, "certificate": cert, "delta": delta}),
                ),
                code,
            ))
        }
        Command::Certificate { eps, delta, n, m } => {
            let cert = certificate(*eps, *delta, *n, *m)?;
            Ok((
                Report::new(
                    "certificate",
                    json!({"eps": eps, "delta": delta, "n": n, "m": m}),
                    serde_json::to_value(&cert)?,
                ),
                0,
            ))
        }
        Command::Example {
            kind,
            k,
            n,
            delta,
            seed,
            max_attempts,
        } => {
            let missing = |flag: &str| Error::Domain(format!("--{flag} is required for this kind"));
            let spec = match kind {
                ExampleKind::Gb => {
                    let k = k.ok_or_else(|| missing("k"))?;
                    let seed = seed.ok_or_else(|| missing("seed"))?;
                    let (matrix, attempts) = find_gb_matrix(k, seed, *max_attempts, budget)?;
                    let spec = GameSpec::GaleBerlekamp {
                        k,
                        delta: Some(delta.unwrap_or(20.0 / (k as f64).sqrt())),
                        seed: Some(seed),
                        matrix: Some(matrix.to_rows()),
                    };
                    eprintln!("verified matrix found after {attempts} attempt(s)");
                    spec
                }
                ExampleKind::MassMp => GameSpec::MassMp {
                    k: k.ok_or_else(|| missing("k"))?,
                },
                ExampleKind::Restaurant => GameSpec::Restaurant {
                    n: n.ok_or_else(|| missing("n"))?,
                    delta: delta.ok_or_else(|| missing("delta"))?,
                },
            };
            Ok((
                Report::new("example", json!({}), serde_json::to_value(&spec)?),
                0,
            ))
        }
        Command::VerifyDiscrepancy {
            game,
            mode,
            samples,
            seed,
        } => {
            let text = std::fs::read_to_string(&game.game)?;
            let spec: GameSpec = serde_json::from_str(&text)?;
            let GameSpec::GaleBerlekamp {
                k, seed: mseed, matrix, ..
            } = spec
            else {
                return Err(Error::InvalidGame(
                    "verify-discrepancy needs a gale_berlekamp spec".into(),
                ));
            };
            let m = match matrix {
                Some(rows) => SignMatrix::from_rows(k, &rows)?,
                None => SignMatrix::random(
                    k,
                    mseed.ok_or_else(|| {
                        Error::InvalidGame("gb spec without matrix needs a seed".into())
                    })?,
                )?,
            };
            let mode = match mode {
                VerifyMode::Exhaustive => DiscrepancyMode::Exhaustive,
                VerifyMode::MonteCarlo => DiscrepancyMode::MonteCarlo {
                    samples: *samples,
                    seed: seed.expect("clap enforces --seed for monte-carlo"),
                },
            };
            let out = verify_discrepancy(&m, mode, budget)?;
            let code = if out.ok { 0 } else { 1 };
            Ok((
                Report::new(
                    "verify-discrepancy",
                    json!({"game": &game.game, "k": k}),
                    serde_json::to_value(&out)?,
                ),
                code,
            ))
        }
        Command::AnonymousPurify { game, tol, seed } => {
            let g = load_game(&game.game, budget)?;
            let ag = g.as_anonymous().ok_or_else(|| {
                Error::InvalidGame("anonymous-purify needs an anonymous-style spec".into())
            })?;
            let out = anonymous_purify(ag, *tol, *seed)?;
            let code = if out.meets_bound { 0 } else { 1 };
            Ok((
                Report::new(
                    "anonymous-purify",
                    json!({"game": &game.game, "tol": tol, "seed": seed}),
                    serde_json::to_value(&out)?,
                ),
                code,
            ))
        }
        Command::Replicate {
            game,
            l,
            eps,
            method,
            seed,
            mu,
        } => {
            let g = Arc::new(load_game(&game.game, budget)?);
            let method = match method {
                Method::SelfPurify => ReplicationMethod::SelfPurify,
                Method::Search => ReplicationMethod::Search,
            };
            let base_mu = load_mu(mu, &g)?;
            let out = nash_via_replication(&g, *eps, *l, method, Some(&base_mu), *seed, budget)?;
            let code = if out.meets_eps { 0 } else { 1 };
            Ok((
                Report::new(
                    "replicate",
                    json!({"game": &game.game, "L": l, "eps": eps, "seed": seed}),
                    serde_json::to_value(&out)?,
                ),
                code,
            ))
        }
        Command::Experiment { name, seed } => {
            let budget = cli
                .budget
                .or_else(env_budget)
                .unwrap_or(lipgame::experiments::EXPERIMENT_BUDGET);
            let results = lipgame::experiments::run_experiment(name, *seed, budget)?;
            let mut all_pass = true;
            for r in &results {
                eprintln!("{}", r.summary_line());
                all_pass &= r.pass;
            }
            let code = if all_pass { 0 } else { 1 };
            Ok((
                Report::new(
                    "experiment",
                    json!({"name": name, "seed": seed}),
                    serde_json::to_value(&results)?,
                ),
                code,
            ))
        }
        Command::Thresholds { eps, n, m } => {
            let results = json!({
                "delta_trivial": delta_trivial(*eps, *n)?,
                "delta_main": delta_main(*eps, *m, *n)?,
                "delta_anonymous": delta_anonymous(*eps, *m)?,
            });
            Ok((
                Report::new("thresholds", json!({"eps": eps, "n": n, "m": m}), results),
                0,
            ))
        }
    }
}

fn env_budget() -> Option<u64> {
    std::env::var("LIPGAME_BUDGET").ok()?.parse().ok()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let budget = cli.budget.or_else(env_budget).unwrap_or(DEFAULT_BUDGET);
    match run(&cli, budget) {
        Ok((report, code)) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = report.write_to(path) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
                None => println!("{}", report.to_json()),
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

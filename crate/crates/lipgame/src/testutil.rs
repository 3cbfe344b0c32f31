//! Small hand-checkable games shared across unit tests.

use crate::game_core::Game;
use crate::DEFAULT_BUDGET;

/// Player 0 wants to match, player 1 to mismatch; payoffs ±1.
pub fn matching_pennies() -> Game {
    let t0 = vec![1.0, -1.0, -1.0, 1.0];
    let t1: Vec<f64> = t0.iter().map(|x| -x).collect();
    Game::explicit(vec![2, 2], vec![t0, t1], DEFAULT_BUDGET).unwrap()
}

/// Both players get 1 on a match, 0 otherwise.
pub fn coordination() -> Game {
    let t = vec![1.0, 0.0, 0.0, 1.0];
    Game::explicit(vec![2, 2], vec![t.clone(), t], DEFAULT_BUDGET).unwrap()
}

/// All payoffs equal `c`.
pub fn constant(strategy_counts: &[usize], c: f64) -> Game {
    let per = crate::game_core::profile_count(strategy_counts) as usize;
    let tables = vec![vec![c; per]; strategy_counts.len()];
    Game::explicit(strategy_counts.to_vec(), tables, DEFAULT_BUDGET).unwrap()
}

/// Additively separable 3-player game: f_i(a) = h_i(a_i) + c_i(a_{−i}) with
/// c_i of large range, so δ(G) is large while η(G) = 0.
pub fn separable3() -> Game {
    let counts = [2usize, 2, 2];
    let per = 8;
    let mut tables = vec![vec![0.0; per]; 3];
    let mut a = vec![0usize; 3];
    let mut rank = 0;
    loop {
        for i in 0..3 {
            let own = 0.5 * a[i] as f64;
            let opp: usize = (0..3).filter(|&j| j != i).map(|j| a[j]).sum();
            tables[i][rank] = own + 10.0 * opp as f64;
        }
        rank += 1;
        if !crate::game_core::advance_profile(&counts, &mut a) {
            break;
        }
    }
    Game::explicit(counts.to_vec(), tables, DEFAULT_BUDGET).unwrap()
}

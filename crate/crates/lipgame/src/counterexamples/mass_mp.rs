use crate::error::{Error, Result};
use crate::game_core::{Game, GameKind, GameSpec, Payoffs};

/// The mass matching-pennies game: 2k players, 2^k strategies each. A
/// strategy index encodes a ±1 vector bitwise (bit b = 0 ↦ +1 in coordinate
/// b). Female i earns `(1/4k)·Σ_j x_i[j]·y_j[i]`, male j the negative of his
/// column's sum, so the game is zero-sum with Lipschitz constant 2/4k = 1/n.
pub fn build_mass_mp_game(k: usize) -> Result<Game> {
    if k == 0 || k > 20 {
        return Err(Error::InvalidGame(
            "mass matching pennies needs 1 ≤ k ≤ 20 (2^k strategies per player)".into(),
        ));
    }
    Ok(Game::from_parts(
        vec![1usize << k; 2 * k],
        GameKind::MassMatchingPennies,
        Payoffs::MassMp { k },
        Some(GameSpec::MassMp { k }),
    ))
}

#[inline]
fn coord(strategy: usize, bit: usize) -> i64 {
    1 - 2 * ((strategy >> bit) & 1) as i64
}

/// Integer coordinate sum behind the payoff; own flip negates it.
fn mass_mp_core(k: usize, i: usize, a: &[usize]) -> i64 {
    if i < k {
        // Female i: Σ_j x_i[j]·y_j[i].
        (0..k).map(|j| coord(a[i], j) * coord(a[k + j], i)).sum()
    } else {
        let j = i - k;
        -(0..k).map(|r| coord(a[r], j) * coord(a[i], r)).sum::<i64>()
    }
}

pub(crate) fn mass_mp_payoff(k: usize, i: usize, a: &[usize]) -> f64 {
    mass_mp_core(k, i, a) as f64 / (4 * k) as f64
}

//! Exhaustive solver over memoryless strategy pairs, for tiny games.

use crate::model::Player;
use crate::parity::{FiniteParityGame, ParityGameError};

use super::Solution;

pub const BRUTE_FORCE_LIMIT: usize = 10;

/// All memoryless strategies of `p`, as successor choices per state.
fn strategies(g: &FiniteParityGame, p: Player) -> Vec<Vec<u32>> {
    let mut all = vec![vec![0u32; g.len()]];
    for v in 0..g.len() as u32 {
        if g.owner[v as usize] != p {
            continue;
        }
        let mut next = Vec::with_capacity(all.len() * g.succ(v).len());
        for s in &all {
            for &t in g.succ(v) {
                let mut s = s.clone();
                s[v as usize] = t;
                next.push(s);
            }
        }
        all = next;
    }
    all
}

/// Winner of the unique play from `v` once both players' choices are fixed.
fn play_winner(g: &FiniteParityGame, s1: &[u32], s2: &[u32], v: u32) -> Player {
    let next = |u: u32| if g.owner[u as usize] == Player::P1 { s1[u as usize] } else { s2[u as usize] };
    let mut seen = vec![usize::MAX; g.len()];
    let mut path = Vec::new();
    let mut u = v;
    while seen[u as usize] == usize::MAX {
        seen[u as usize] = path.len();
        path.push(u);
        u = next(u);
    }
    let top = path[seen[u as usize]..].iter().map(|&w| g.priority[w as usize]).max().unwrap();
    if top % 2 == 0 {
        Player::P1
    } else {
        Player::P2
    }
}

/// States from which `s` wins against every memoryless counter-strategy.
fn won_by(g: &FiniteParityGame, p: Player, s: &[u32], counter: &[Vec<u32>]) -> Vec<bool> {
    (0..g.len() as u32)
        .map(|v| {
            counter.iter().all(|c| {
                let w = match p {
                    Player::P1 => play_winner(g, s, c, v),
                    Player::P2 => play_winner(g, c, s, v),
                };
                w == p
            })
        })
        .collect()
}

pub fn brute_force_parity(g: &FiniteParityGame) -> Result<Solution, ParityGameError> {
    if g.len() > BRUTE_FORCE_LIMIT {
        return Err(ParityGameError::TooLarge { size: g.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let n = g.len();
    let all1 = strategies(g, Player::P1);
    let all2 = strategies(g, Player::P2);
    let won1: Vec<Vec<bool>> = all1.iter().map(|s| won_by(g, Player::P1, s, &all2)).collect();
    let won2: Vec<Vec<bool>> = all2.iter().map(|s| won_by(g, Player::P2, s, &all1)).collect();
    let union = |won: &[Vec<bool>]| (0..n).map(|v| won.iter().any(|w| w[v])).collect::<Vec<bool>>();
    let w1 = union(&won1);
    let w2 = union(&won2);
    assert!((0..n).all(|v| w1[v] != w2[v]), "memoryless determinacy failed");
    // a single strategy winning everywhere the player can win exists by positional determinacy
    let uniform = |won: &[Vec<bool>], target: &[bool]| won.iter().position(|w| (0..n).all(|v| !target[v] || w[v])).unwrap();
    let u1 = &all1[uniform(&won1, &w1)];
    let u2 = &all2[uniform(&won2, &w2)];
    let winner: Vec<Player> = (0..n).map(|v| if w1[v] { Player::P1 } else { Player::P2 }).collect();
    let strategy = (0..n)
        .map(|v| match (g.owner[v], winner[v]) {
            (Player::P1, Player::P1) => Some(u1[v]),
            (Player::P2, Player::P2) => Some(u2[v]),
            _ => None,
        })
        .collect();
    Ok(Solution { winner, strategy })
}

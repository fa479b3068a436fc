//! Parity game solvers and strategy checking.

mod brute;
mod spm;
mod strategy;
mod zielonka;

pub use brute::{brute_force_parity, BRUTE_FORCE_LIMIT};
pub use spm::solve_spm;
pub use strategy::{extract_region_strategy, ExtractError, RecipeDisplay, RegionMove, RegionStrategy};
pub use zielonka::solve_zielonka;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::model::Player;
use crate::parity::FiniteParityGame;

/// Winning partition with memoryless strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// Chosen successor, defined exactly on states whose owner wins them.
    pub strategy: Vec<Option<u32>>,
}

impl Solution {
    pub fn win(&self, p: Player) -> Vec<u32> {
        (0..self.winner.len() as u32).filter(|&v| self.winner[v as usize] == p).collect()
    }

    pub fn win1(&self) -> Vec<u32> {
        self.win(Player::P1)
    }

    pub fn win2(&self) -> Vec<u32> {
        self.win(Player::P2)
    }

    pub fn wins(&self, v: u32, p: Player) -> bool {
        self.winner[v as usize] == p
    }
}

/// Reasons a claimed solution is not backed by its strategies.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("strategy at state {0} is missing or not an edge")]
    NotAnEdge(u32),
    #[error("strategy is defined at state {0}, which its owner does not win")]
    Undue(u32),
    #[error("state {from} lets the play leave the winning set of {player} to {to}")]
    Escape { player: Player, from: u32, to: u32 },
    #[error("the strategy of {player} admits a cycle with maximal priority {priority}")]
    BadCycle { player: Player, priority: u32 },
}

/// Checks determinacy bookkeeping and, for each player, that fixing their
/// strategy on their winning set leaves only cycles whose maximal priority
/// has their parity.
pub fn verify_solution(g: &FiniteParityGame, sol: &Solution) -> Result<(), StrategyError> {
    for v in 0..g.len() as u32 {
        let owner = g.owner[v as usize];
        match sol.strategy[v as usize] {
            Some(_) if sol.winner[v as usize] != owner => return Err(StrategyError::Undue(v)),
            Some(t) if !g.succ(v).contains(&t) => return Err(StrategyError::NotAnEdge(v)),
            None if sol.winner[v as usize] == owner => return Err(StrategyError::NotAnEdge(v)),
            _ => {}
        }
    }
    for player in [Player::P1, Player::P2] {
        verify_player(g, sol, player)?;
    }
    Ok(())
}

fn verify_player(g: &FiniteParityGame, sol: &Solution, player: Player) -> Result<(), StrategyError> {
    let n = g.len();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for v in 0..n as u32 {
        if sol.winner[v as usize] != player {
            continue;
        }
        if g.owner[v as usize] == player {
            let t = sol.strategy[v as usize].expect("checked above");
            if sol.winner[t as usize] != player {
                return Err(StrategyError::Escape { player, from: v, to: t });
            }
            edges.push((v, t));
        } else {
            for &t in g.succ(v) {
                if sol.winner[t as usize] != player {
                    return Err(StrategyError::Escape { player, from: v, to: t });
                }
                edges.push((v, t));
            }
        }
    }
    let bad_parity = match player {
        Player::P1 => 1,
        Player::P2 => 0,
    };
    let mut bad: Vec<u32> = g.priority.iter().copied().filter(|p| p % 2 == bad_parity).collect();
    bad.sort_unstable();
    bad.dedup();
    for q in bad {
        let keep = |v: u32| sol.winner[v as usize] == player && g.priority[v as usize] <= q;
        let mut graph: DiGraph<u32, ()> = DiGraph::with_capacity(n, edges.len());
        let nodes: Vec<_> = (0..n as u32).map(|v| graph.add_node(v)).collect();
        for &(a, b) in &edges {
            if keep(a) && keep(b) {
                graph.add_edge(nodes[a as usize], nodes[b as usize], ());
            }
        }
        for scc in tarjan_scc(&graph) {
            let members: Vec<u32> = scc.iter().map(|&i| graph[i]).collect();
            let cyclic = members.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            if cyclic && keep(members[0]) && members.iter().any(|&v| g.priority[v as usize] == q) {
                return Err(StrategyError::BadCycle { player, priority: q });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use crate::harness::random_parity_game as random_game;
    use super::*;
    use crate::parity::ParityGameBuilder;

    fn single(owner: Player, prio: u32) -> FiniteParityGame {
        let mut b = ParityGameBuilder::new();
        b.add_state(owner, prio, [0]);
        b.finish().unwrap()
    }

    #[test]
    fn self_loops() {
        for solve in [solve_zielonka, solve_spm, |g: &FiniteParityGame| brute_force_parity(g).unwrap()] {
            assert_eq!(solve(&single(Player::P2, 0)).winner, vec![Player::P1]);
            assert_eq!(solve(&single(Player::P1, 1)).winner, vec![Player::P2]);
        }
    }

    #[test]
    fn two_cycle_of_player_two() {
        let mut b = ParityGameBuilder::new();
        b.add_state(Player::P2, 1, [1]);
        b.add_state(Player::P2, 2, [0]);
        let g = b.finish().unwrap();
        for sol in [solve_zielonka(&g), solve_spm(&g), brute_force_parity(&g).unwrap()] {
            assert_eq!(sol.winner, vec![Player::P1, Player::P1]);
        }
    }

    #[test]
    fn a_false_strategy_is_caught() {
        let mut b = ParityGameBuilder::new();
        b.add_state(Player::P1, 1, [0, 1]);
        b.add_state(Player::P1, 2, [1]);
        let g = b.finish().unwrap();
        let good = solve_zielonka(&g);
        assert_eq!(good.strategy[0], Some(1));
        let bad = Solution { winner: good.winner.clone(), strategy: vec![Some(0), Some(1)] };
        assert!(matches!(verify_solution(&g, &bad), Err(StrategyError::BadCycle { .. })));
    }

    #[test]
    fn solvers_agree_with_brute_force() {
        for seed in 0..300 {
            let g = random_game(seed, 8, 4);
            let z = solve_zielonka(&g);
            let s = solve_spm(&g);
            let b = brute_force_parity(&g).unwrap();
            assert_eq!(z.winner, b.winner, "seed {seed}");
            assert_eq!(s.winner, b.winner, "seed {seed}");
            verify_solution(&g, &z).unwrap();
            verify_solution(&g, &s).unwrap();
            verify_solution(&g, &b).unwrap();
        }
    }

    #[test]
    fn zielonka_and_spm_agree_on_larger_games() {
        for seed in 0..100 {
            let g = random_game(1000 + seed, 60, 6);
            let z = solve_zielonka(&g);
            assert_eq!(z.winner, solve_spm(&g).winner, "seed {seed}");
            verify_solution(&g, &z).unwrap();
        }
    }
}

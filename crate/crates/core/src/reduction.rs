//! Finite turn-based parity games built from the enlarged region graph.
//!
//! Two constructions are provided. The bipartite game alternates a player 1
//! proposal state with one player 2 state per proposal. The linear game
//! splits each round into three stages: player 1 picks a time slot `j` (or
//! relinquishes), player 2 either blocks with a move of at most that slot or
//! allows, and then player 1 commits to an action in slot `j`. Intermediate
//! "dummy" commit states that would only forward to the next round's entry
//! state are not materialized; their edges point at the entry state directly.

use std::fmt;

use crate::enlarged::{ext_parity, ExtGraph, MoveKind};
use crate::model::Player;
use crate::parity::{FiniteParityGame, ParityGameBuilder};

/// Provenance of a state of the linear game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Player 1 chooses a slot or relinquishes.
    Entry,
    /// Player 2 answers a proposal to act in slot `j`.
    Respond(u8),
    /// Player 1 picks what to do in slot `j`.
    Commit(u8),
    /// Player 2 moves alone after player 1 relinquished.
    Relinquished,
}

/// Provenance of a state of the bipartite game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Proposal {
    Wait(u8),
    Act(u8, usize),
    Relinquish,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AfStage {
    Propose,
    Answer(Proposal),
}

/// A finite game together with the ExtRegion and stage of every state.
pub struct Reduced<S> {
    pub game: FiniteParityGame,
    pub tags: Vec<(u32, S)>,
    /// Index of the player 1 entry state of each ExtRegion.
    pub entry: Vec<u32>,
}

impl<S: fmt::Display> Reduced<S> {
    /// The finite game with every state labelled `<ExtRegion> @ <stage>`.
    pub fn labelled_game(&self, ext: &ExtGraph) -> FiniteParityGame {
        let mut g = self.game.clone();
        g.labels = self.tags.iter().map(|(x, stage)| format!("{} @ {stage}", ext.label(*x))).collect();
        g
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Entry => f.write_str("1a"),
            Stage::Respond(j) => write!(f, "{j},2"),
            Stage::Commit(j) => write!(f, "{j},1c"),
            Stage::Relinquished => f.write_str("2"),
        }
    }
}

/// Sorted, deduplicated targets of the moves of `owner` from `x` in the slots accepted by `slot`.
fn targets(ext: &ExtGraph, x: u32, owner: Player, slot: impl Fn(u8) -> bool, entry: &[u32]) -> Vec<u32> {
    let mut t: Vec<u32> = ext.moves(x).iter().filter(|m| m.owner == owner && slot(m.j)).map(|m| entry[m.target as usize]).collect();
    t.sort_unstable();
    t.dedup();
    t
}

/// The linear-size game. Per ExtRegion the states are laid out as
/// `Entry, Respond(0..h), Commit(0..h), Relinquished`, so lowest-index
/// tie-breaking prefers acting over relinquishing.
pub fn build_af_star(ext: &ExtGraph) -> Reduced<Stage> {
    let relinquish = ext.relinquish();
    let mut entry = Vec::with_capacity(ext.len());
    let mut next = 0u32;
    for i in 0..ext.len() {
        entry.push(next);
        next += 1 + 2 * ext.horizon[i] as u32 + relinquish as u32;
    }
    let mut b = ParityGameBuilder::with_capacity(next as usize, ext.edge_count() * 2);
    let mut tags = Vec::with_capacity(next as usize);
    for i in 0..ext.len() as u32 {
        let h = ext.horizon[i as usize];
        let prio = ext_parity(ext.node(i));
        let base = entry[i as usize];
        let respond = |j: u8| base + 1 + j as u32;
        let commit = |j: u8| base + 1 + h as u32 + j as u32;

        let mut out: Vec<u32> = (0..h).map(respond).collect();
        if relinquish {
            out.push(base + 1 + 2 * h as u32);
        }
        b.add_state(Player::P1, prio, out);
        tags.push((i, Stage::Entry));
        for j in 0..h {
            let mut out = targets(ext, i, Player::P2, |k| k <= j, &entry);
            out.push(commit(j));
            b.add_state(Player::P2, prio, out);
            tags.push((i, Stage::Respond(j)));
        }
        for j in 0..h {
            b.add_state(Player::P1, prio, targets(ext, i, Player::P1, |k| k == j, &entry));
            tags.push((i, Stage::Commit(j)));
        }
        if relinquish {
            b.add_state(Player::P2, prio, targets(ext, i, Player::P2, |_| true, &entry));
            tags.push((i, Stage::Relinquished));
        }
    }
    let game = b.finish().expect("every slot offers a waiting move to both players");
    Reduced { game, tags, entry }
}

/// The bipartite game: per ExtRegion one player 1 state followed by one
/// player 2 state per proposal (slot and action, or relinquish).
pub fn build_af(ext: &ExtGraph) -> Reduced<AfStage> {
    let relinquish = ext.relinquish();
    let proposals: Vec<Vec<(Proposal, u32)>> = (0..ext.len() as u32)
        .map(|i| {
            let mut ps: Vec<(Proposal, u32)> = ext
                .moves(i)
                .iter()
                .filter(|m| m.owner == Player::P1)
                .map(|m| {
                    let p = match m.kind {
                        MoveKind::Wait => Proposal::Wait(m.j),
                        MoveKind::Act(e) => Proposal::Act(m.j, e),
                    };
                    (p, m.target)
                })
                .collect();
            if relinquish {
                ps.push((Proposal::Relinquish, u32::MAX));
            }
            ps
        })
        .collect();
    let mut entry = Vec::with_capacity(ext.len());
    let mut next = 0u32;
    for ps in &proposals {
        entry.push(next);
        next += 1 + ps.len() as u32;
    }
    let mut b = ParityGameBuilder::with_capacity(next as usize, ext.edge_count() * 4);
    let mut tags = Vec::with_capacity(next as usize);
    for i in 0..ext.len() as u32 {
        let base = entry[i as usize];
        let prio = ext_parity(ext.node(i));
        let ps = &proposals[i as usize];
        b.add_state(Player::P1, prio, (0..ps.len() as u32).map(|k| base + 1 + k));
        tags.push((i, AfStage::Propose));
        for &(p, target) in ps {
            let out = match p {
                Proposal::Relinquish => targets(ext, i, Player::P2, |_| true, &entry),
                Proposal::Wait(j) | Proposal::Act(j, _) => {
                    let mut out = targets(ext, i, Player::P2, |k| k <= j, &entry);
                    let allow = entry[target as usize];
                    if let Err(pos) = out.binary_search(&allow) {
                        out.insert(pos, allow);
                    }
                    out
                }
            };
            b.add_state(Player::P2, prio, out);
            tags.push((i, AfStage::Answer(p)));
        }
    }
    let game = b.finish().expect("every proposal has an outcome");
    Reduced { game, tags, entry }
}

/// ExtRegions whose entry state is in `win`, given as a membership mask over finite states.
pub fn regstates<S>(r: &Reduced<S>, win: &[bool]) -> Vec<bool> {
    r.entry.iter().map(|&e| win[e as usize]).collect()
}

/// `|ExtRegions|·(2 + 3·(|A1|+1))`: one proposal state, one relinquish
/// answer and three slots of answers per player 1 action or wait.
pub fn af_state_bound(ext_regions: usize, player1_actions: usize) -> usize {
    ext_regions * (2 + 3 * (player1_actions + 1))
}

/// `8·|ExtRegions|`.
pub fn af_star_state_bound(ext_regions: usize) -> usize {
    8 * ext_regions
}

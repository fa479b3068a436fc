//! Decompiling finite-game strategies into region recipes.

use std::fmt;

use crate::enlarged::{ExtGraph, MoveKind};
use crate::model::Player;
use crate::reduction::{Reduced, Stage};

use super::Solution;

/// What player 1 does from a region: relinquish, or let time pass into the
/// `j`-th time successor and then wait or take an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionMove {
    Relinquish,
    Wait { j: u8 },
    Act { j: u8, edge: usize },
}

impl RegionMove {
    pub fn slot(&self) -> Option<u8> {
        match self {
            RegionMove::Relinquish => None,
            RegionMove::Wait { j } | RegionMove::Act { j, .. } => Some(*j),
        }
    }
}

/// A memoryless recipe per ExtRegion; `None` outside player 1's winning set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionStrategy {
    pub moves: Vec<Option<RegionMove>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("stage tags cover {tags} states but the solution has {states}")]
    MissingTags { tags: usize, states: usize },
    #[error("winning entry state {0} has no usable continuation")]
    Broken(u32),
}

/// Reads the recipe off a solution of the linear game.
pub fn extract_region_strategy(ext: &ExtGraph, reduced: &Reduced<Stage>, sol: &Solution) -> Result<RegionStrategy, ExtractError> {
    if reduced.tags.len() != sol.winner.len() {
        return Err(ExtractError::MissingTags { tags: reduced.tags.len(), states: sol.winner.len() });
    }
    let mut moves = vec![None; ext.len()];
    for (x, &e) in reduced.entry.iter().enumerate() {
        if !sol.wins(e, Player::P1) {
            continue;
        }
        let choice = sol.strategy[e as usize].ok_or(ExtractError::Broken(e))?;
        moves[x] = Some(match reduced.tags[choice as usize].1 {
            Stage::Relinquished => RegionMove::Relinquish,
            Stage::Respond(j) => {
                let commit = e + 1 + ext.horizon[x] as u32 + j as u32;
                let next = sol.strategy[commit as usize].ok_or(ExtractError::Broken(e))?;
                let m = ext
                    .moves(x as u32)
                    .iter()
                    .find(|m| m.owner == Player::P1 && m.j == j && reduced.entry[m.target as usize] == next)
                    .ok_or(ExtractError::Broken(e))?;
                match m.kind {
                    MoveKind::Wait => RegionMove::Wait { j },
                    MoveKind::Act(edge) => RegionMove::Act { j, edge },
                }
            }
            _ => return Err(ExtractError::Broken(e)),
        });
    }
    Ok(RegionStrategy { moves })
}

/// Renders a recipe with action names from the game.
pub struct RecipeDisplay<'a> {
    pub recipe: &'a RegionMove,
    pub actions: &'a dyn Fn(usize) -> String,
}

impl fmt::Display for RecipeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.recipe {
            RegionMove::Relinquish => f.write_str("relinquish"),
            RegionMove::Wait { j } => write!(f, "delay to successor {j}, wait"),
            RegionMove::Act { j, edge } => write!(f, "delay to successor {j}, take {}", (self.actions)(*edge)),
        }
    }
}

//! End-to-end solving: regions, enlarged graph, finite game, solver, and
//! the projection of results back to regions of the timed game.

use std::collections::BTreeSet;

use crate::enlarged::{build_ext_region_graph, ext_region_bound, BuildError, ExtGraph, Mode};
use crate::model::{ModelError, Player, TimedGame};
use crate::parity::FiniteParityGame;
use crate::reduction::{af_star_state_bound, build_af_star, Reduced, Stage};
use crate::regions::{count_regions, enumerate_regions, region_of_valuation, Region, RegionError};
use crate::robust::{build_jitter_game, JitterGame, JitterParams};
use crate::solver::{extract_region_strategy, solve_spm, solve_zielonka, ExtractError, RegionMove, RegionStrategy, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Zielonka,
    Spm,
    /// Runs both and fails if they disagree.
    Both,
}

/// The winning notion to compute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WinMode {
    Exact,
    LimitRobust,
    BoundedRobust(JitterParams),
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("solvers disagree on state {0}")]
    SolverDisagreement(u32),
    #[error("size bound violated: {0}")]
    SizeBound(String),
}

/// Solves a finite game with the chosen algorithm(s).
pub fn solve_finite(g: &FiniteParityGame, solver: SolverChoice) -> Result<Solution, PipelineError> {
    match solver {
        SolverChoice::Zielonka => Ok(solve_zielonka(g)),
        SolverChoice::Spm => Ok(solve_spm(g)),
        SolverChoice::Both => {
            let z = solve_zielonka(g);
            let s = solve_spm(g);
            if let Some(v) = (0..g.len()).find(|&v| z.winner[v] != s.winner[v]) {
                return Err(PipelineError::SolverDisagreement(v as u32));
            }
            Ok(z)
        }
    }
}

/// Everything computed for one game and one set of seed regions.
pub struct Analysis {
    pub ext: ExtGraph,
    pub reduced: Reduced<Stage>,
    pub solution: Solution,
    /// Per ExtRegion: whether player 1 wins from it.
    pub winning: Vec<bool>,
    pub strategy: RegionStrategy,
}

impl Analysis {
    /// Whether the `i`-th seed is won by player 1.
    pub fn seed_wins(&self, i: usize) -> bool {
        self.winning[self.ext.seeds[i] as usize]
    }

    pub fn seed_recipe(&self, i: usize) -> Option<RegionMove> {
        self.strategy.moves[self.ext.seeds[i] as usize]
    }
}

/// Runs the region pipeline from the given seeds.
pub fn analyze(g: &TimedGame, mode: Mode, seeds: &[Region], solver: SolverChoice) -> Result<Analysis, PipelineError> {
    let ext = build_ext_region_graph(g, mode, seeds)?;
    let reduced = build_af_star(&ext);
    if reduced.game.len() > af_star_state_bound(ext.len()) {
        return Err(PipelineError::SizeBound(format!("{} finite states for {} ExtRegions", reduced.game.len(), ext.len())));
    }
    let solution = solve_finite(&reduced.game, solver)?;
    let winning = reduced.entry.iter().map(|&e| solution.wins(e, Player::P1)).collect();
    let strategy = extract_region_strategy(&ext, &reduced, &solution)?;
    Ok(Analysis { ext, reduced, solution, winning, strategy })
}

/// Checks the ExtRegion count against `ext_region_bound`.
pub fn check_ext_bound(g: &TimedGame, ext: &ExtGraph) -> Result<(), PipelineError> {
    let bound = ext_region_bound(g, ext.mode, count_regions(g)?);
    if ext.len() as u128 > bound {
        return Err(PipelineError::SizeBound(format!("{} ExtRegions exceed {}", ext.len(), bound)));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryVerdict {
    pub label: String,
    /// Region of the query in the solved game.
    pub region: Region,
    pub win: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub regions: usize,
    pub ext_regions: usize,
    pub finite_states: usize,
    pub finite_edges: usize,
}

/// Result of solving a game in one mode.
pub struct SolveResult {
    pub mode: WinMode,
    /// The game whose regions are reported: the input game, or the jitter game.
    pub game: TimedGame,
    pub jitter: Option<JitterGame>,
    /// Candidate regions of `game`, in enumeration order.
    pub regions: Vec<Region>,
    pub winning: Vec<bool>,
    pub recipes: Vec<Option<RegionMove>>,
    pub queries: Vec<QueryVerdict>,
    pub stats: Stats,
    /// The underlying construction; its seeds start with `regions`.
    pub analysis: Analysis,
}

impl SolveResult {
    pub fn winning_regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().zip(&self.winning).filter(|(_, &w)| w).map(|(r, _)| r)
    }

    /// Winning regions expressed over the input game: the identity except in
    /// bounded-robust mode, where a source region counts as winning if some
    /// part of it is.
    pub fn winning_source_regions(&self, source: &TimedGame) -> BTreeSet<Region> {
        match &self.jitter {
            None => self.winning_regions().cloned().collect(),
            Some(j) => self.winning_regions().filter_map(|r| j.project_region(source, r)).collect(),
        }
    }

    pub fn all_queries_win(&self) -> bool {
        self.queries.iter().all(|q| q.win)
    }
}

/// Solves `g` in the given mode, from every region and every query state.
pub fn solve(g: &TimedGame, mode: &WinMode, solver: SolverChoice) -> Result<SolveResult, PipelineError> {
    let (game, jitter, ext_mode) = match mode {
        WinMode::Exact => (g.clone(), None, Mode::Exact),
        WinMode::LimitRobust => (g.clone(), None, Mode::LimitRobust),
        WinMode::BoundedRobust(p) => {
            let j = build_jitter_game(g, p);
            (j.game.clone(), Some(j), Mode::Exact)
        }
    };
    game.validate()?;
    let mut regions = enumerate_regions(&game)?;
    if let Some(j) = &jitter {
        let z = j.jitter_clock;
        regions.retain(|r| j.origin[r.loc as usize].is_some() && r.h[z] == 0 && r.cls[z] == 0);
    }
    let ceil = game.ceilings();
    let query_regions: Vec<Region> =
        game.states.iter().map(|s| region_of_valuation(&ceil, s.location, &s.valuation)).collect();
    let mut seeds = regions.clone();
    for r in &query_regions {
        if !seeds.contains(r) {
            seeds.push(r.clone());
        }
    }
    let analysis = analyze(&game, ext_mode, &seeds, solver)?;
    check_ext_bound(&game, &analysis.ext)?;
    let winning: Vec<bool> = (0..regions.len()).map(|i| analysis.seed_wins(i)).collect();
    let recipes = (0..regions.len()).map(|i| analysis.seed_recipe(i)).collect();
    let queries = game
        .states
        .iter()
        .zip(query_regions)
        .map(|(s, r)| {
            let i = seeds.iter().position(|x| *x == r).expect("query regions are seeded");
            QueryVerdict { label: s.label.clone(), region: r, win: analysis.seed_wins(i) }
        })
        .collect();
    let stats = Stats {
        regions: regions.len(),
        ext_regions: analysis.ext.len(),
        finite_states: analysis.reduced.game.len(),
        finite_edges: analysis.reduced.game.edge_count(),
    };
    Ok(SolveResult { mode: mode.clone(), game, jitter, regions, winning, recipes, queries, stats, analysis })
}

/// Whether each player has a receptive strategy from the query states (or
/// from every region when the game has no queries).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Receptiveness {
    pub player1: bool,
    pub player2: bool,
}

pub fn check_receptive(g: &TimedGame) -> Result<Receptiveness, PipelineError> {
    let mut flat = g.clone();
    for l in &mut flat.locations {
        l.parity = 0;
    }
    let seeds = if g.states.is_empty() {
        enumerate_regions(g)?
    } else {
        let ceil = g.ceilings();
        g.states.iter().map(|s| region_of_valuation(&ceil, s.location, &s.valuation)).collect()
    };
    let all_win = |game: &TimedGame| -> Result<bool, PipelineError> {
        let a = analyze(game, Mode::Exact, &seeds, SolverChoice::Zielonka)?;
        Ok((0..seeds.len()).all(|i| a.seed_wins(i)))
    };
    Ok(Receptiveness { player1: all_win(&flat)?, player2: all_win(&flat.swapped_roles())? })
}

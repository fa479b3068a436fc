//! Region graph of the enlarged game.
//!
//! Each node is an [`ExtRegion`]: a region over the game clocks plus a
//! global clock `z` (ceiling 1, wrapping back to 0), together with the bits
//! that turn "time diverges and parity holds, or player 1 is blameless" into
//! a plain parity condition. Edges are the move classes of both players that
//! stay within the current region and its next two time successors.

use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::model::{Player, TimedGame};
use crate::regions::{next_region, reset, satisfies, Region, RegionDisplay, RegionError};

/// Which winning notion the graph encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    LimitRobust,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtRegion {
    /// Region over the game clocks followed by `z`.
    pub base: Region,
    pub tick: bool,
    pub tbl1: bool,
    pub p: u8,
    /// Present only in limit-robust mode.
    pub rb1: Option<bool>,
}

impl ExtRegion {
    /// The seed `⟨R, z=0, tick=false, tbl1=false, p=0⟩` of a game region.
    pub fn seed(r: &Region, mode: Mode) -> ExtRegion {
        let mut base = r.clone();
        base.h.push(0);
        base.cls.push(0);
        ExtRegion { base, tick: false, tbl1: false, p: 0, rb1: (mode == Mode::LimitRobust).then_some(true) }
    }

    /// The game-level region, with `z` dropped.
    pub fn game_region(&self) -> Region {
        self.base.without_last_clock()
    }

    pub fn location(&self) -> usize {
        self.base.loc as usize
    }
}

/// Encoded parity: `1` once robustness is lost, otherwise `0`/`1` between
/// ticks depending on blame, and `p + 2` on a tick.
pub fn ext_parity(x: &ExtRegion) -> u32 {
    if x.rb1 == Some(false) {
        return 1;
    }
    match (x.tick, x.tbl1) {
        (false, false) => 0,
        (false, true) => 1,
        (true, _) => x.p as u32 + 2,
    }
}

/// What a move class does after its delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Wait,
    /// Index into the game's edge list.
    Act(usize),
}

/// A move landing in the `j`-th time successor of the source region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveClass {
    pub owner: Player,
    pub j: u8,
    pub kind: MoveKind,
    pub target: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("query region {0} violates the invariant of its location")]
    SeedOutsideInvariant(String),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Reachable part of the enlarged region graph.
pub struct ExtGraph {
    pub game: TimedGame,
    pub mode: Mode,
    /// Ceilings of the game clocks followed by `1` for `z`.
    pub ceilings: Vec<u64>,
    pub nodes: IndexSet<ExtRegion>,
    /// Number of usable time successors per node, `1..=3` (the region itself counts).
    pub horizon: Vec<u8>,
    move_start: Vec<u32>,
    moves: Vec<MoveClass>,
    pub seeds: Vec<u32>,
}

impl ExtGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: u32) -> &ExtRegion {
        &self.nodes[i as usize]
    }

    pub fn moves(&self, i: u32) -> &[MoveClass] {
        &self.moves[self.move_start[i as usize] as usize..self.move_start[i as usize + 1] as usize]
    }

    pub fn relinquish(&self) -> bool {
        self.game.relinquish
    }

    /// Order of the encoded parity function.
    pub fn order(&self) -> u32 {
        self.game.parity_order() + 2
    }

    pub fn edge_count(&self) -> usize {
        self.moves.len()
    }

    /// Canonical label of a node.
    pub fn label(&self, i: u32) -> String {
        let x = self.node(i);
        let mut clocks = self.game.clock_names();
        clocks.push("z".into());
        let locations: Vec<String> = self.game.locations.iter().map(|l| l.name.clone()).collect();
        let mut s = RegionDisplay { region: &x.base, clocks: &clocks, locations: &locations }.to_string();
        let _ = write!(s, " | tick={} tbl1={} p={}", x.tick as u8, x.tbl1 as u8, x.p);
        if let Some(rb) = x.rb1 {
            let _ = write!(s, " rb1={}", rb as u8);
        }
        s
    }

    /// Graphviz rendering of the graph.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ext {\n  node [shape=box, fontname=monospace];\n");
        for i in 0..self.len() as u32 {
            let _ = writeln!(out, "  n{} [label=\"{}\\nprio {}\"];", i, self.label(i), ext_parity(self.node(i)));
        }
        for i in 0..self.len() as u32 {
            for m in self.moves(i) {
                let what = match m.kind {
                    MoveKind::Wait => "wait".to_string(),
                    MoveKind::Act(e) => self.game.edges[e].action.clone(),
                };
                let _ = writeln!(out, "  n{} -> n{} [label=\"{} j={} {}\"];", i, m.target, m.owner, m.j, what);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the graph reachable from the seeds of the given game regions.
pub fn build_ext_region_graph(g: &TimedGame, mode: Mode, seeds: &[Region]) -> Result<ExtGraph, BuildError> {
    let mut ceilings = g.ceilings();
    ceilings.push(1);
    let z = ceilings.len() - 1;
    let parity: Vec<u8> = g.locations.iter().map(|l| l.parity as u8).collect();
    let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); g.locations.len()];
    for (i, e) in g.edges.iter().enumerate() {
        by_loc[e.source].push(i);
    }

    let mut nodes: IndexSet<ExtRegion> = IndexSet::new();
    let mut seed_ids = Vec::with_capacity(seeds.len());
    for r in seeds {
        let x = ExtRegion::seed(r, mode);
        if !satisfies(&ceilings, &x.base, &g.locations[r.loc as usize].invariant)? {
            let names = g.clock_names();
            let locs: Vec<String> = g.locations.iter().map(|l| l.name.clone()).collect();
            return Err(BuildError::SeedOutsideInvariant(
                RegionDisplay { region: r, clocks: &names, locations: &locs }.to_string(),
            ));
        }
        seed_ids.push(nodes.insert_full(x).0 as u32);
    }

    let mut horizon = Vec::new();
    let mut move_start = vec![0u32];
    let mut moves: Vec<MoveClass> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let x = nodes[i].clone();
        let loc = x.location();
        let inv = &g.locations[loc].invariant;

        // time successors with cumulative "z wrapped" flags
        let mut chain: Vec<(Region, bool)> = vec![(x.base.clone(), false)];
        while chain.len() < 3 {
            let (prev, crossed) = chain.last().unwrap();
            let mut next = next_region(&ceilings, prev).expect("the global clock keeps time moving");
            let mut wrapped = *crossed;
            if next.cls[z] == 0 && next.h[z] == 1 {
                next.h[z] = 0;
                wrapped = true;
            }
            if !satisfies(&ceilings, &next, inv)? {
                break;
            }
            chain.push((next, wrapped));
        }
        horizon.push(chain.len() as u8);

        let target = |owner: Player, blamed: Player, k: usize, new_loc: usize, resets: &[usize], nodes: &mut IndexSet<ExtRegion>| {
            let (r, crossed) = &chain[k];
            let base = reset(r, resets).with_location(new_loc);
            let p = if x.tick { parity[new_loc] } else { x.p.max(parity[new_loc]) };
            let rb1 = x.rb1.map(|b| b && (owner == Player::P2 || r.is_open()));
            let t = ExtRegion { base, tick: *crossed, tbl1: blamed == Player::P1 && k <= 1, p, rb1 };
            nodes.insert_full(t).0 as u32
        };

        for k in 0..chain.len() {
            for owner in [Player::P1, Player::P2] {
                let t = target(owner, owner, k, loc, &[], &mut nodes);
                moves.push(MoveClass { owner, j: k as u8, kind: MoveKind::Wait, target: t });
            }
            for &ei in &by_loc[loc] {
                let e = &g.edges[ei];
                if !satisfies(&ceilings, &chain[k].0, &e.guard)? {
                    continue;
                }
                let landed = reset(&chain[k].0, &e.resets).with_location(e.target);
                if !satisfies(&ceilings, &landed, &g.locations[e.target].invariant)? {
                    continue;
                }
                let t = target(e.owner, e.blamed(), k, e.target, &e.resets, &mut nodes);
                moves.push(MoveClass { owner: e.owner, j: k as u8, kind: MoveKind::Act(ei), target: t });
            }
        }
        move_start.push(moves.len() as u32);
        i += 1;
    }

    Ok(ExtGraph { game: g.clone(), mode, ceilings, nodes, horizon, move_start, moves, seeds: seed_ids })
}

/// The size ceiling `c·(|C|+1)·d·|regions|` with `c = 32` (exact) or `64`
/// (limit-robust, which carries the extra robustness bit).
pub fn ext_region_bound(g: &TimedGame, mode: Mode, regions: usize) -> u128 {
    let c: u128 = match mode {
        Mode::Exact => 32,
        Mode::LimitRobust => 64,
    };
    c * (g.clocks.len() as u128 + 1) * g.parity_order() as u128 * regions as u128
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_game;
    use crate::regions::ABOVE;

    fn one_clock() -> TimedGame {
        parse_game("game g\nclock x\nloc a parity 0\nloc b parity 1\nedge p1 go from a to b guard \"x>=1\"\n").unwrap()
    }

    fn zero() -> Region {
        Region { loc: 0, h: vec![0], cls: vec![0] }
    }

    #[test]
    fn parity_table() {
        let mut x = ExtRegion::seed(&zero(), Mode::Exact);
        assert_eq!(ext_parity(&x), 0);
        x.tbl1 = true;
        assert_eq!(ext_parity(&x), 1);
        x.tick = true;
        x.p = 1;
        assert_eq!(ext_parity(&x), 3);
        x.rb1 = Some(false);
        x.p = 4;
        assert_eq!(ext_parity(&x), 1);
    }

    #[test]
    fn seeds_and_moves() {
        let g = one_clock();
        let graph = build_ext_region_graph(&g, Mode::Exact, &[zero()]).unwrap();
        assert_eq!(graph.seeds, vec![0]);
        assert_eq!(graph.horizon[0], 3);
        let ms = graph.moves(0);
        // the edge is enabled only at x=1, the second successor
        let acts: Vec<_> = ms.iter().filter(|m| matches!(m.kind, MoveKind::Act(_))).collect();
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].j, 2);
        let t = graph.node(acts[0].target);
        // player 1 moved but crossed two regions, and z hit 1 on the way
        assert!(!t.tbl1);
        assert!(t.tick);
        assert_eq!(t.p, 1);
        assert_eq!(t.base.loc, 1);
    }

    #[test]
    fn player_two_moves_never_blame_player_one() {
        let g = one_clock();
        let graph = build_ext_region_graph(&g, Mode::Exact, &[zero()]).unwrap();
        for i in 0..graph.len() as u32 {
            for m in graph.moves(i) {
                let t = graph.node(m.target);
                if m.owner == Player::P2 {
                    assert!(!t.tbl1);
                } else if m.j <= 1 {
                    assert!(t.tbl1);
                }
            }
        }
    }

    #[test]
    fn robustness_bit_is_sticky() {
        let g = one_clock();
        let graph = build_ext_region_graph(&g, Mode::LimitRobust, &[zero()]).unwrap();
        for i in 0..graph.len() as u32 {
            if graph.node(i).rb1 == Some(false) {
                for m in graph.moves(i) {
                    assert_eq!(graph.node(m.target).rb1, Some(false));
                }
            }
        }
        // a stutter at the seed lands on an integral point: robustness is lost
        let stutter = graph.moves(0).iter().find(|m| m.owner == Player::P1 && m.j == 0).unwrap();
        assert_eq!(graph.node(stutter.target).rb1, Some(false));
    }

    #[test]
    fn unbounded_clock_still_ticks() {
        let g = one_clock();
        let far = Region { loc: 0, h: vec![1], cls: vec![ABOVE] };
        let graph = build_ext_region_graph(&g, Mode::Exact, &[far]).unwrap();
        assert!(graph.nodes.iter().any(|x| x.tick));
    }

    #[test]
    fn seed_outside_invariant_is_rejected() {
        let g = parse_game("game g\nclock x\nloc a invariant \"x<=0\" parity 0\n").unwrap();
        let r = Region { loc: 0, h: vec![0], cls: vec![1] };
        assert!(matches!(build_ext_region_graph(&g, Mode::Exact, &[r]), Err(BuildError::SeedOutsideInvariant(_))));
    }
}

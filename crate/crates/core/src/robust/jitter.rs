//! The jitter/response game: player 1 announces an action, and it fires
//! after a delay chosen by player 2 within the jitter bound.

use std::collections::HashSet;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::model::{Clock, ClockConstraint, Edge, Location, ModelError, Player, QueryState, TimedGame, Q};
use crate::regions::{region_of_valuation, representative, Region};

use super::{erode_guard, zones_to_constraint};

/// Jitter and response bounds, in the time unit of the source game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JitterParams {
    pub jitter: Q,
    pub response: Q,
    /// Blame the non-owner on announce/fire edges when the response bound is zero.
    pub blame_overrides: bool,
}

impl JitterParams {
    pub fn new(jitter: Q, response: Q) -> Result<JitterParams, ModelError> {
        if jitter < Q::zero() || response < Q::zero() {
            return Err(ModelError::NegativeValue("jitter/response".into()));
        }
        Ok(JitterParams { jitter, response, blame_overrides: true })
    }

    /// Least common multiple of the denominators of both bounds.
    pub fn scale(&self) -> u64 {
        self.jitter.denom().lcm(self.response.denom()).to_u64().expect("denominator fits in 64 bits")
    }
}

/// The transformed game with the bookkeeping to map results back.
#[derive(Clone, Debug)]
pub struct JitterGame {
    pub game: TimedGame,
    /// Every constant of the source game is multiplied by this factor.
    pub scale: u64,
    /// Index of the fresh clock measuring time since the last discrete step.
    pub jitter_clock: usize,
    /// Source location of each location; intermediate copies are `None`.
    pub origin: Vec<Option<usize>>,
    pub jitter: u64,
    pub response: u64,
}

fn fresh(taken: &mut HashSet<String>, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

fn with_reset(resets: &[usize], z: usize) -> Vec<usize> {
    let mut r = resets.to_vec();
    r.push(z);
    r.sort_unstable();
    r.dedup();
    r
}

pub fn build_jitter_game(g: &TimedGame, p: &JitterParams) -> JitterGame {
    let k = p.scale();
    let to_int = |q: &Q| (q * Q::from_integer(k.into())).to_integer().to_u64().expect("scaled bound fits in 64 bits");
    let ej = to_int(&p.jitter);
    let er = to_int(&p.response);
    let n = g.clocks.len();
    let z = n;

    let mut clock_names: HashSet<String> = g.clocks.iter().map(|c| c.name.clone()).collect();
    let mut out = TimedGame::new(g.name.clone());
    out.relinquish = g.relinquish;
    out.clocks = g.clocks.iter().map(|c| Clock { name: c.name.clone(), ceiling: c.ceiling * k }).collect();
    out.clocks.push(Clock { name: fresh(&mut clock_names, "z".into()), ceiling: ej.max(er).max(1) });
    out.locations = g
        .locations
        .iter()
        .map(|l| Location { name: l.name.clone(), invariant: l.invariant.scaled(k), parity: l.parity })
        .collect();
    let mut origin: Vec<Option<usize>> = (0..g.locations.len()).map(Some).collect();
    let mut loc_names: HashSet<String> = g.locations.iter().map(|l| l.name.clone()).collect();
    let mut actions: HashSet<String> = g.edges.iter().map(|e| e.action.clone()).collect();

    let erode = |c: &ClockConstraint| -> ClockConstraint {
        let zones = erode_guard(c, &Q::from_integer(ej.into()), n + 1);
        zones_to_constraint(&zones).expect("erosion by an integer keeps integer constants")
    };
    let waited = if er == 0 { ClockConstraint::True } else { ClockConstraint::Ge(z, er) };
    let swap = p.blame_overrides && er == 0;

    for e in &g.edges {
        let guard = e.guard.scaled(k);
        if e.owner == Player::P2 {
            out.edges.push(Edge { guard, resets: with_reset(&e.resets, z), ..e.clone() });
            continue;
        }
        let src = &g.locations[e.source];
        if ej == 0 {
            out.edges.push(Edge {
                guard: ClockConstraint::and(vec![src.invariant.scaled(k), waited.clone(), guard]),
                resets: with_reset(&e.resets, z),
                ..e.clone()
            });
            continue;
        }
        // the action must stay enabled, target invariant included, for the whole window
        let enabling = ClockConstraint::and(vec![guard.clone(), out.locations[e.target].invariant.after_reset(&e.resets)]);
        let le = out.locations.len();
        out.locations.push(Location {
            name: fresh(&mut loc_names, format!("{}.{}", src.name, e.action)),
            invariant: ClockConstraint::Le(z, ej),
            parity: src.parity,
        });
        origin.push(None);
        out.edges.push(Edge {
            source: e.source,
            owner: Player::P1,
            action: fresh(&mut actions, format!("req.{}.{}", src.name, e.action)),
            guard: ClockConstraint::and(vec![erode(&src.invariant.scaled(k)), waited.clone(), erode(&enabling)]),
            target: le,
            resets: vec![z],
            blame_as: swap.then_some(Player::P2),
        });
        out.edges.push(Edge {
            source: le,
            owner: Player::P2,
            action: fresh(&mut actions, format!("take.{}.{}", src.name, e.action)),
            guard,
            target: e.target,
            resets: with_reset(&e.resets, z),
            blame_as: swap.then_some(Player::P1),
        });
        for e2 in g.edges.iter().filter(|e2| e2.source == e.source && e2.owner == Player::P2) {
            out.edges.push(Edge {
                source: le,
                owner: Player::P2,
                action: fresh(&mut actions, format!("{}.{}.{}", e2.action, src.name, e.action)),
                guard: e2.guard.scaled(k),
                target: e2.target,
                resets: with_reset(&e2.resets, z),
                blame_as: None,
            });
        }
    }
    out.states = g
        .states
        .iter()
        .map(|s| {
            let mut v: Vec<Q> = s.valuation.iter().map(|x| x * Q::from_integer(k.into())).collect();
            v.push(Q::zero());
            QueryState { label: s.label.clone(), location: s.location, valuation: v }
        })
        .collect();
    out.raise_ceilings();
    JitterGame { game: out, scale: k, jitter_clock: z, origin, jitter: ej, response: er }
}

impl JitterGame {
    /// A source valuation in the transformed time unit, with the fresh clock at zero.
    pub fn lift_valuation(&self, v: &[Q]) -> Vec<Q> {
        let k = Q::from_integer(self.scale.into());
        let mut w: Vec<Q> = v.iter().map(|x| x * &k).collect();
        w.push(Q::zero());
        w
    }

    /// The source region containing a region of the transformed game, when
    /// it sits at a source location with the fresh clock at zero.
    pub fn project_region(&self, source: &TimedGame, r: &Region) -> Option<Region> {
        let loc = self.origin[r.loc as usize]?;
        let z = self.jitter_clock;
        if r.h[z] != 0 || r.cls[z] != 0 {
            return None;
        }
        let v = representative(&self.game.ceilings(), r);
        let k = Q::from_integer(self.scale.into());
        let back: Vec<Q> = v[..z].iter().map(|x| x / &k).collect();
        Some(region_of_valuation(&source.ceilings(), loc, &back))
    }
}

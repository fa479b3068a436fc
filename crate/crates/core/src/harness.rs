//! Randomized checks and independent oracles.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enlarged::{build_ext_region_graph, ExtGraph, ExtRegion, Mode, MoveKind};
use crate::model::{
    apply_move, enabled_move, joint_destination, Clock, ClockConstraint, ConcreteState, Edge, Location, Move, MoveAction, Player,
    TimedGame, Q,
};
use crate::parity::{FiniteParityGame, ParityGameBuilder};
use crate::pipeline::PipelineError;
use crate::reduction::{build_af, build_af_star, regstates};
use crate::regions::{enumerate_regions, region_of_valuation, Region, ABOVE};
use crate::solver::{solve_spm, solve_zielonka, verify_solution};

pub use crate::solver::brute_force_parity;

/// Shape limits for random timed games.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RandomGameSpec {
    pub seed: u64,
    pub max_locations: usize,
    pub max_clocks: usize,
    pub max_ceiling: u64,
    pub max_edges_per_player: usize,
    pub max_order: u32,
}

impl RandomGameSpec {
    pub fn new(seed: u64) -> RandomGameSpec {
        RandomGameSpec { seed, max_locations: 4, max_clocks: 2, max_ceiling: 3, max_edges_per_player: 4, max_order: 3 }
    }
}

fn random_atom(rng: &mut ChaCha8Rng, clocks: &[Clock]) -> ClockConstraint {
    let x = rng.gen_range(0..clocks.len());
    let k = rng.gen_range(0..=clocks[x].ceiling);
    match rng.gen_range(0..4) {
        0 => ClockConstraint::Le(x, k),
        1 => ClockConstraint::Ge(x, k),
        2 => ClockConstraint::not(ClockConstraint::Le(x, k)),
        _ => ClockConstraint::not(ClockConstraint::Ge(x, k)),
    }
}

/// A random game; deterministic per seed. Invariants are `true` or a lower
/// bound, so time can always progress inside a location.
pub fn random_game(spec: &RandomGameSpec) -> TimedGame {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut g = TimedGame::new(format!("random{}", spec.seed));
    for x in 0..rng.gen_range(0..=spec.max_clocks) {
        g.clocks.push(Clock { name: format!("x{x}"), ceiling: rng.gen_range(1..=spec.max_ceiling) });
    }
    let nl = rng.gen_range(1..=spec.max_locations);
    let order = rng.gen_range(1..=spec.max_order);
    for l in 0..nl {
        let invariant = if !g.clocks.is_empty() && rng.gen_bool(0.15) {
            let x = rng.gen_range(0..g.clocks.len());
            ClockConstraint::Ge(x, rng.gen_range(0..=1))
        } else {
            ClockConstraint::True
        };
        g.locations.push(Location { name: format!("l{l}"), invariant, parity: rng.gen_range(0..order) });
    }
    for (owner, prefix) in [(Player::P1, "a"), (Player::P2, "b")] {
        for k in 0..rng.gen_range(0..=spec.max_edges_per_player) {
            let guard = if g.clocks.is_empty() || rng.gen_bool(0.25) {
                ClockConstraint::True
            } else {
                let atoms = (0..rng.gen_range(1..=2)).map(|_| random_atom(&mut rng, &g.clocks)).collect();
                ClockConstraint::and(atoms)
            };
            let mut resets: Vec<usize> = (0..g.clocks.len()).filter(|_| rng.gen_bool(0.4)).collect();
            resets.sort_unstable();
            g.edges.push(Edge {
                source: rng.gen_range(0..nl),
                owner,
                action: format!("{prefix}{k}"),
                guard,
                target: rng.gen_range(0..nl),
                resets,
                blame_as: None,
            });
        }
    }
    g.raise_ceilings();
    g
}

/// A random total parity game with at most `max_states` states and
/// priorities below `prios`; each state has one to three successors.
pub fn random_parity_game(seed: u64, max_states: usize, prios: u32) -> FiniteParityGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_states);
    let mut b = ParityGameBuilder::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::P1 } else { Player::P2 };
        let deg = rng.gen_range(1..=3.min(n));
        let mut succ: Vec<u32> = (0..deg).map(|_| rng.gen_range(0..n as u32)).collect();
        succ.sort_unstable();
        succ.dedup();
        b.add_state(owner, rng.gen_range(0..prios), succ);
    }
    b.finish().expect("every state has a successor")
}

/// Outcome of comparing concrete moves with the symbolic move classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SamplingReport {
    /// Sampled rounds, including those stopped by an enabledness mismatch.
    pub trials: usize,
    pub joint_moves: usize,
    pub ties: usize,
    pub divergences: Vec<String>,
}

/// A random valuation inside a region over `ceil`.
pub fn sample_valuation(rng: &mut impl Rng, ceil: &[u64], r: &Region) -> Vec<Q> {
    let n = r.classes() as usize;
    let den: i64 = 64;
    let mut fr: Vec<i64> = (1..den).collect::<Vec<_>>().choose_multiple(rng, n).copied().collect();
    fr.sort_unstable();
    (0..r.cls.len())
        .map(|x| match r.cls[x] {
            ABOVE => Q::from_integer(ceil[x].into()) + Q::new(rng.gen_range(1..=3 * den).into(), den.into()),
            0 => Q::from_integer(r.h[x].into()),
            c => Q::from_integer(r.h[x].into()) + Q::new(fr[c as usize - 1].into(), den.into()),
        })
        .collect()
}

/// Time windows of the first three regions met while time elapses from `v`:
/// `(lo, hi, lo_closed, hi_closed)`.
fn slot_windows(ceil: &[u64], v: &[Q]) -> Vec<(Q, Q, bool, bool)> {
    let mut bps: Vec<Q> = Vec::new();
    let mut integral = false;
    for (x, val) in v.iter().enumerate() {
        let c = Q::from_integer(ceil[x].into());
        if *val > c {
            continue;
        }
        integral |= val.is_integer();
        let mut next = val.floor() + Q::one();
        while next <= &c + Q::one() && bps.len() < 64 {
            if next <= c {
                bps.push(&next - val);
            }
            next += Q::one();
        }
    }
    bps.sort();
    bps.dedup();
    let zero = Q::zero();
    let b1 = bps.first().cloned();
    let b2 = bps.get(1).cloned();
    match (integral, b1, b2) {
        (true, Some(b1), _) => vec![(zero.clone(), zero, true, true), (Q::zero(), b1.clone(), false, false), (b1.clone(), b1, true, true)],
        (false, Some(b1), Some(b2)) => vec![(zero, b1.clone(), true, false), (b1.clone(), b1.clone(), true, true), (b1, b2, false, false)],
        (false, Some(b1), None) => vec![(zero, b1.clone(), true, false), (b1.clone(), b1, true, true)],
        _ => vec![(zero.clone(), zero, true, true)],
    }
}

fn pick_in(rng: &mut impl Rng, w: &(Q, Q, bool, bool)) -> Q {
    let (lo, hi, lo_closed, _) = w;
    if lo == hi {
        return lo.clone();
    }
    if *lo_closed && rng.gen_bool(0.3) {
        return lo.clone();
    }
    let k = rng.gen_range(1..16);
    lo + (hi - lo) * Q::new(k.into(), 16.into())
}

struct Sampled {
    slot: usize,
    mv: Move,
    kind: Option<MoveKind>,
}

/// Replays random concrete rounds against the enlarged graph of `g` (built
/// from all regions) until `trials` joint moves were resolved, and records
/// every disagreement.
pub fn sample_region_semantics(g: &TimedGame, trials: usize, seed: u64) -> Result<SamplingReport, PipelineError> {
    let seeds = enumerate_regions(g)?;
    let ext = build_ext_region_graph(g, Mode::Exact, &seeds)?;
    Ok(sample_ext_semantics(&ext, trials, seed))
}

pub fn sample_ext_semantics(ext: &ExtGraph, trials: usize, seed: u64) -> SamplingReport {
    let g = &ext.game;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SamplingReport::default();
    let ceil = &ext.ceilings;
    let z = ceil.len() - 1;
    // the extended game: the original plus `z`, so concrete semantics can track it
    let mut gz = g.clone();
    gz.clocks.push(Clock { name: "z".into(), ceiling: 1 });
    // stop at `joint_moves` completed rounds; the attempt cap only guards
    // against games where almost nothing is enabled
    let joint_moves = trials;
    for t in 0..joint_moves * 20 {
        if rep.joint_moves >= joint_moves {
            break;
        }
        rep.trials += 1;
        // every fourth round walks the nodes in order, so small graphs are covered fully
        let xi = if t % 4 == 0 && t / 4 < ext.len() { (t / 4) as u32 } else { rng.gen_range(0..ext.len() as u32) };
        let x = ext.node(xi).clone();
        let v = sample_valuation(&mut rng, ceil, &x.base);
        let s = ConcreteState { location: x.location(), valuation: v.clone() };
        let windows = slot_windows(ceil, &v);
        let mut draw = |owner: Player, rng: &mut ChaCha8Rng| -> Option<Sampled> {
            if owner == Player::P1 && g.relinquish && rng.gen_bool(0.15) {
                return Some(Sampled { slot: 0, mv: Move::new(Q::zero(), MoveAction::Relinquish), kind: None });
            }
            let slot = rng.gen_range(0..windows.len());
            let delay = pick_in(rng, &windows[slot]);
            let edges: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].source == s.location && g.edges[e].owner == owner).collect();
            let (action, kind) = match edges.choose(rng) {
                Some(&e) if rng.gen_bool(0.7) => (MoveAction::Act(g.edges[e].action.clone()), MoveKind::Act(e)),
                _ => (MoveAction::Wait, MoveKind::Wait),
            };
            let mv = Move::new(delay, action);
            let concrete = enabled_move(&gz, &s, owner, &mv);
            let class = ext.moves(xi).iter().find(|m| m.owner == owner && m.j as usize == slot && m.kind == kind);
            if concrete != class.is_some() {
                rep.divergences.push(format!(
                    "{}: {owner} move {:?} after {} is {} concretely but {} symbolically",
                    ext.label(xi),
                    kind,
                    mv.delay,
                    if concrete { "enabled" } else { "disabled" },
                    if class.is_some() { "present" } else { "absent" }
                ));
                return None;
            }
            concrete.then_some(Sampled { slot, mv, kind: Some(kind) })
        };
        let Some(m1) = draw(Player::P1, &mut rng) else { continue };
        let Some(mut m2) = draw(Player::P2, &mut rng) else { continue };
        if m1.kind.is_some() && rng.gen_bool(0.2) {
            // force a tie on the delay
            let tied = Move::new(m1.mv.delay.clone(), m2.mv.action.clone());
            if enabled_move(&gz, &s, Player::P2, &tied) {
                m2 = Sampled { slot: m1.slot, mv: tied, kind: m2.kind };
                rep.ties += 1;
            }
        }
        rep.joint_moves += 1;
        let outcomes = match joint_destination(&gz, &s, &m1.mv, &m2.mv) {
            Ok(o) => o,
            Err(e) => {
                rep.divergences.push(format!("{}: joint destination failed: {e}", ext.label(xi)));
                continue;
            }
        };
        let predicted: Vec<Player> = match (&m1.kind, m1.slot.cmp(&m2.slot)) {
            (None, _) => vec![Player::P2],
            (_, std::cmp::Ordering::Less) => vec![Player::P1],
            (_, std::cmp::Ordering::Greater) => vec![Player::P2],
            _ => vec![Player::P1, Player::P2],
        };
        for o in &outcomes {
            if !predicted.contains(&o.via) {
                rep.divergences.push(format!("{}: outcome via {} not predicted by the region order", ext.label(xi), o.via));
                continue;
            }
            let m = if o.via == Player::P1 { &m1 } else { &m2 };
            let kind = m.kind.expect("relinquish never produces an outcome of its own");
            let class = ext.moves(xi).iter().find(|c| c.owner == o.via && c.j as usize == m.slot && c.kind == kind).unwrap();
            let target = ext.node(class.target);
            let expect = concrete_target(&gz, &x, &s, &m.mv, z, o.via, m.slot, kind);
            if *target != expect {
                rep.divergences.push(format!("{}: {} move {:?} lands in {:?}, expected {:?}", ext.label(xi), o.via, kind, target, expect));
            }
            let blamed_p1 = match kind {
                MoveKind::Act(e) => g.edges[e].blamed() == Player::P1,
                MoveKind::Wait => o.via == Player::P1,
            };
            if blamed_p1 && !(o.bl1 || o.via != Player::P1) {
                rep.divergences.push(format!("{}: player 1 outcome without player 1 blame", ext.label(xi)));
            }
        }
    }
    rep
}

/// The ExtRegion a concrete move leads to, computed with rational arithmetic.
#[allow(clippy::too_many_arguments)]
fn concrete_target(gz: &TimedGame, x: &ExtRegion, s: &ConcreteState, mv: &Move, z: usize, via: Player, slot: usize, kind: MoveKind) -> ExtRegion {
    let next = apply_move(gz, s, mv).expect("enabled move has a successor");
    let mut v = next.valuation;
    let crossed = v[z] >= Q::one();
    v[z] = &v[z] - v[z].floor();
    let ceil = gz.ceilings();
    let base = region_of_valuation(&ceil, next.location, &v);
    let omega = gz.locations[next.location].parity as u8;
    let blamed = match kind {
        MoveKind::Act(e) => gz.edges[e].blamed(),
        MoveKind::Wait => via,
    };
    let landing = region_of_valuation(&ceil, s.location, &crate::model::elapse(&s.valuation, &mv.delay));
    ExtRegion {
        base,
        tick: crossed,
        tbl1: blamed == Player::P1 && slot <= 1,
        p: if x.tick { omega } else { x.p.max(omega) },
        rb1: x.rb1.map(|b| b && (via == Player::P2 || !landing.cls.contains(&0))),
    }
}

/// Agreement of the two finite constructions under both solvers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CrossCheckReport {
    pub ext_regions: usize,
    pub af_states: usize,
    pub af_star_states: usize,
    pub winning: usize,
    /// ExtRegions on which the four verdicts differ.
    pub mismatches: Vec<u32>,
    /// Strategy soundness failures, if any.
    pub unsound: Vec<String>,
}

impl CrossCheckReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.unsound.is_empty()
    }
}

/// Builds both finite games from the same ExtRegion graph and compares the
/// projected winning sets across constructions, and across solvers when
/// `with_spm` is set. Progress measures get slow beyond a few thousand states.
pub fn cross_check(g: &TimedGame, seeds: &[Region], mode: Mode, with_spm: bool) -> Result<CrossCheckReport, PipelineError> {
    let ext = build_ext_region_graph(g, mode, seeds)?;
    let af = build_af(&ext);
    let star = build_af_star(&ext);
    let mut verdicts: Vec<Vec<bool>> = Vec::new();
    let mut unsound = Vec::new();
    for (name, game, entry_proj) in [("af", &af.game, 0), ("af*", &star.game, 1)] {
        let mut sols = vec![("zielonka", solve_zielonka(game))];
        if with_spm {
            sols.push(("spm", solve_spm(game)));
        }
        for (solver, sol) in sols {
            if let Err(e) = verify_solution(game, &sol) {
                unsound.push(format!("{name}/{solver}: {e}"));
            }
            let win: Vec<bool> = sol.winner.iter().map(|&p| p == Player::P1).collect();
            verdicts.push(if entry_proj == 0 { regstates(&af, &win) } else { regstates(&star, &win) });
        }
    }
    let mismatches = (0..ext.len()).filter(|&i| verdicts.iter().any(|v| v[i] != verdicts[0][i])).map(|i| i as u32).collect();
    Ok(CrossCheckReport {
        ext_regions: ext.len(),
        af_states: af.game.len(),
        af_star_states: star.game.len(),
        winning: verdicts[0].iter().filter(|&&b| b).count(),
        mismatches,
        unsound,
    })
}

/// Greedily removes edges, then locations, while `fails` keeps holding.
pub fn shrink_game(g: &TimedGame, fails: &dyn Fn(&TimedGame) -> bool) -> TimedGame {
    let mut cur = g.clone();
    let mut i = 0;
    while i < cur.edges.len() {
        let mut cand = cur.clone();
        cand.edges.remove(i);
        if fails(&cand) {
            cur = cand;
        } else {
            i += 1;
        }
    }
    let mut l = 0;
    while l < cur.locations.len() && cur.locations.len() > 1 {
        let cand = without_location(&cur, l);
        if fails(&cand) {
            cur = cand;
        } else {
            l += 1;
        }
    }
    cur
}

fn without_location(g: &TimedGame, l: usize) -> TimedGame {
    let mut h = g.clone();
    h.locations.remove(l);
    let fix = |i: usize| if i > l { i - 1 } else { i };
    h.edges = g.edges.iter().filter(|e| e.source != l && e.target != l).cloned().map(|mut e| {
        e.source = fix(e.source);
        e.target = fix(e.target);
        e
    }).collect();
    h.states = g.states.iter().filter(|s| s.location != l).cloned().map(|mut s| {
        s.location = fix(s.location);
        s
    }).collect();
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::FIG1;
    use crate::model::parse_game;

    #[test]
    fn random_games_are_valid_and_reproducible() {
        for seed in 0..50 {
            let g = random_game(&RandomGameSpec::new(seed));
            g.validate().unwrap();
            assert_eq!(g, random_game(&RandomGameSpec::new(seed)));
        }
    }

    #[test]
    fn sampled_rounds_match_fig1() {
        let g = parse_game(FIG1).unwrap();
        let rep = sample_region_semantics(&g, 400, 3).unwrap();
        assert!(rep.divergences.is_empty(), "{:#?}", &rep.divergences[..rep.divergences.len().min(5)]);
        assert!(rep.ties > 0 && rep.joint_moves > 100);
    }

    #[test]
    fn windows_of_an_integral_start() {
        let w = slot_windows(&[2, 1], &[Q::zero(), Q::zero()]);
        assert_eq!(w.len(), 3);
        assert_eq!(w[2].0, Q::one());
    }

    #[test]
    fn shrinking_keeps_the_failure() {
        let g = parse_game(FIG1).unwrap();
        let has_a12 = |h: &TimedGame| h.edges.iter().any(|e| e.action == "a12");
        let small = shrink_game(&g, &has_a12);
        assert_eq!(small.edges.len(), 1);
        assert!(has_a12(&small));
    }

    #[test]
    fn cross_check_small_games() {
        use crate::fixtures::{DEADLINE, OPEN_COUNTEREX, RELINQUISH_ONLY};
        for text in [DEADLINE, OPEN_COUNTEREX, RELINQUISH_ONLY] {
            let g = parse_game(text).unwrap();
            for mode in [Mode::Exact, Mode::LimitRobust] {
                let rep = cross_check(&g, &enumerate_regions(&g).unwrap(), mode, true).unwrap();
                assert!(rep.ok(), "{}: {rep:?}", g.name);
            }
        }
    }

    #[test]
    fn cross_check_random_games() {
        for seed in 0..25 {
            let g = random_game(&RandomGameSpec::new(seed));
            let regions = enumerate_regions(&g).unwrap();
            let rep = cross_check(&g, &regions, Mode::Exact, regions.len() <= 20).unwrap();
            assert!(rep.ok(), "seed {seed}: {rep:?}");
        }
    }
}

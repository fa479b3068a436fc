//! Concrete move semantics over exact rational valuations.

use num_traits::Zero;

use super::{ClockConstraint, ModelError, Player, TimedGame, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcreteState {
    pub location: usize,
    pub valuation: Vec<Q>,
}

/// What a move does after its delay.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MoveAction {
    /// Take the owner's edge labelled with this action.
    Act(String),
    /// Pure time elapse (the `⊥` move of the owner).
    Wait,
    /// Player 1 hands the round to player 2.
    Relinquish,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub delay: Q,
    pub action: MoveAction,
}

impl Move {
    pub fn new(delay: Q, action: MoveAction) -> Self {
        Move { delay, action }
    }
}

/// One possible result of a round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub state: ConcreteState,
    /// The player whose move produced the state.
    pub via: Player,
    pub bl1: bool,
    pub bl2: bool,
    pub delay: Q,
}

pub fn elapse(v: &[Q], d: &Q) -> Vec<Q> {
    v.iter().map(|x| x + d).collect()
}

/// Times in `[0, d]` at which some atom of `c` may change truth value along `v + t`.
fn breakpoints(c: &ClockConstraint, v: &[Q], d: &Q) -> Vec<Q> {
    let mut ts = vec![Q::zero(), d.clone()];
    c.visit_atoms(&mut |a| {
        if let ClockConstraint::Le(x, k) | ClockConstraint::Ge(x, k) = a {
            let t = Q::from_integer((*k).into()) - &v[*x];
            if t >= Q::zero() && &t <= d {
                ts.push(t);
            }
        }
    });
    ts.sort();
    ts.dedup();
    ts
}

/// Whether `c` holds at `v + t` for every `t` in `[0, d]`.
pub fn holds_throughout(c: &ClockConstraint, v: &[Q], d: &Q) -> bool {
    let ts = breakpoints(c, v, d);
    let two = Q::from_integer(2.into());
    for (i, t) in ts.iter().enumerate() {
        if !c.holds(&elapse(v, t)) {
            return false;
        }
        if let Some(next) = ts.get(i + 1) {
            let mid = (t + next) / &two;
            if !c.holds(&elapse(v, &mid)) {
                return false;
            }
        }
    }
    true
}

/// Whether the location invariant holds along the whole elapse of `d`.
pub fn invariant_holds_during(g: &TimedGame, s: &ConcreteState, d: &Q) -> bool {
    holds_throughout(&g.locations[s.location].invariant, &s.valuation, d)
}

/// Membership of a move in the enabled-move set of `player` at `s`.
pub fn enabled_move(g: &TimedGame, s: &ConcreteState, player: Player, m: &Move) -> bool {
    if m.delay < Q::zero() {
        return false;
    }
    match &m.action {
        MoveAction::Relinquish => player == Player::P1 && g.relinquish,
        MoveAction::Wait => invariant_holds_during(g, s, &m.delay),
        MoveAction::Act(a) => {
            invariant_holds_during(g, s, &m.delay) && apply_move(g, s, m).is_some() && owner_of(g, s, a) == Some(player)
        }
    }
}

fn owner_of(g: &TimedGame, s: &ConcreteState, action: &str) -> Option<Player> {
    g.edges_from(s.location).find(|(_, e)| e.action == action).map(|(_, e)| e.owner)
}

/// Successor of a single move; `None` if the action is not enabled after the
/// delay or its target violates the target invariant. Relinquish has no
/// successor of its own.
pub fn apply_move(g: &TimedGame, s: &ConcreteState, m: &Move) -> Option<ConcreteState> {
    let v = elapse(&s.valuation, &m.delay);
    match &m.action {
        MoveAction::Relinquish => None,
        MoveAction::Wait => Some(ConcreteState { location: s.location, valuation: v }),
        MoveAction::Act(a) => {
            let (_, e) = g.edges_from(s.location).find(|(_, e)| &e.action == a)?;
            if !e.guard.holds(&v) {
                return None;
            }
            let mut w = v;
            for &x in &e.resets {
                w[x] = Q::zero();
            }
            g.locations[e.target].invariant.holds(&w).then_some(ConcreteState { location: e.target, valuation: w })
        }
    }
}

/// The joint destination of a round, with blame bits and elapsed time per outcome.
pub fn joint_destination(g: &TimedGame, s: &ConcreteState, m1: &Move, m2: &Move) -> Result<Vec<Outcome>, ModelError> {
    if !enabled_move(g, s, Player::P1, m1) {
        return Err(ModelError::IllegalMove(format!("player 1 cannot play {m1:?}")));
    }
    if !enabled_move(g, s, Player::P2, m2) || m2.action == MoveAction::Relinquish {
        return Err(ModelError::IllegalMove(format!("player 2 cannot play {m2:?}")));
    }
    let relinquished = m1.action == MoveAction::Relinquish;
    let d1 = &m1.delay;
    let d2 = &m2.delay;
    let t1 = apply_move(g, s, m1);
    let t2 = apply_move(g, s, m2).expect("enabled move has a successor");
    let mut out = Vec::new();
    let mut push = |state: ConcreteState, via: Player, delay: &Q| {
        let bl1 = !relinquished && d1 <= d2 && t1.as_ref() == Some(&state);
        let bl2 = relinquished || (d2 <= d1 && t2 == state);
        out.push(Outcome { state, via, bl1, bl2, delay: delay.clone() });
    };
    if relinquished || d2 < d1 {
        push(t2.clone(), Player::P2, d2);
    } else if d1 < d2 {
        push(t1.clone().unwrap(), Player::P1, d1);
    } else {
        push(t1.clone().unwrap(), Player::P1, d1);
        if t1.as_ref() != Some(&t2) {
            push(t2.clone(), Player::P2, d2);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_game;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn game() -> TimedGame {
        parse_game(
            "game t\nclock x max 2\nloc a invariant \"x<=1\" parity 0\nloc b parity 0\n\
             edge p1 go from a to b guard \"x>=1\" reset x\nedge p2 stop from a to b guard \"x<=1\"\n",
        )
        .unwrap()
    }

    fn st(x: Q) -> ConcreteState {
        ConcreteState { location: 0, valuation: vec![x] }
    }

    #[test]
    fn zero_wait_is_always_enabled() {
        let g = game();
        let m = Move::new(q(0, 1), MoveAction::Wait);
        assert!(enabled_move(&g, &st(q(1, 1)), Player::P1, &m));
        assert!(enabled_move(&g, &st(q(1, 1)), Player::P2, &m));
    }

    #[test]
    fn invariant_blocks_long_waits() {
        let g = game();
        assert!(!enabled_move(&g, &st(q(1, 1)), Player::P1, &Move::new(q(1, 2), MoveAction::Wait)));
        assert!(enabled_move(&g, &st(q(0, 1)), Player::P1, &Move::new(q(1, 1), MoveAction::Act("go".into()))));
    }

    #[test]
    fn shorter_delay_wins() {
        let g = game();
        let s = st(q(0, 1));
        let out = joint_destination(
            &g,
            &s,
            &Move::new(q(1, 2), MoveAction::Wait),
            &Move::new(q(1, 1), MoveAction::Act("stop".into())),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].via, Player::P1);
        assert!(out[0].bl1 && !out[0].bl2);
        assert_eq!(out[0].delay, q(1, 2));
    }

    #[test]
    fn relinquish_cedes_to_player_two() {
        let g = game();
        let out = joint_destination(
            &g,
            &st(q(0, 1)),
            &Move::new(q(0, 1), MoveAction::Relinquish),
            &Move::new(q(1, 3), MoveAction::Wait),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].bl2 && !out[0].bl1);
        assert_eq!(out[0].delay, q(1, 3));
    }

    #[test]
    fn equal_delays_give_both_outcomes() {
        let g = game();
        let s = st(q(1, 2));
        let out = joint_destination(
            &g,
            &s,
            &Move::new(q(1, 2), MoveAction::Act("go".into())),
            &Move::new(q(1, 2), MoveAction::Act("stop".into())),
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        let waits = joint_destination(
            &g,
            &s,
            &Move::new(q(1, 4), MoveAction::Wait),
            &Move::new(q(1, 4), MoveAction::Wait),
        )
        .unwrap();
        assert_eq!(waits.len(), 1);
        assert!(waits[0].bl1 && waits[0].bl2);
    }

    #[test]
    fn illegal_moves_are_rejected() {
        let g = game();
        let bad = Move::new(q(3, 1), MoveAction::Wait);
        assert!(joint_destination(&g, &st(q(0, 1)), &bad, &Move::new(q(0, 1), MoveAction::Wait)).is_err());
    }
}

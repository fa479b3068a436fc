//! Robust winning: guard erosion and the jitter/response transformation.

mod jitter;
pub mod zone;

pub use jitter::{build_jitter_game, JitterGame, JitterParams};

use crate::model::{ClockConstraint, Q};
use zone::{complement_union, simplify, zones_of, Zone};

/// Valuations from which `c` keeps holding for every delay in `[0, eps]`,
/// as a union of zones over `clocks` clocks.
pub fn erode_guard(c: &ClockConstraint, eps: &Q, clocks: usize) -> Vec<Zone> {
    let bad = complement_union(&zones_of(c, clocks), clocks);
    let reach_bad: Vec<Zone> = simplify(bad.iter().map(|z| z.dilate(eps)).collect());
    complement_union(&reach_bad, clocks)
}

/// A zone union as a constraint. Fails with the offending constant when a
/// bound is not an integer.
pub fn zones_to_constraint(zones: &[Zone]) -> Result<ClockConstraint, Q> {
    let parts = zones.iter().map(Zone::to_constraint).collect::<Result<Vec<_>, _>>()?;
    Ok(ClockConstraint::or(parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn member(zs: &[Zone], v: &[Q]) -> bool {
        zs.iter().any(|z| z.contains(v))
    }

    #[test]
    fn upper_bounds_shrink() {
        let e = erode_guard(&ClockConstraint::Le(0, 1), &q(1, 2), 1);
        assert!(member(&e, &[q(1, 2)]));
        assert!(!member(&e, &[q(51, 100)]));
    }

    #[test]
    fn lower_bounds_survive() {
        let e = erode_guard(&ClockConstraint::Ge(0, 1), &q(3, 1), 1);
        assert!(member(&e, &[q(1, 1)]));
        assert!(member(&e, &[q(100, 1)]));
        assert!(!member(&e, &[q(99, 100)]));
    }

    #[test]
    fn erosion_does_not_distribute_over_union() {
        let c = ClockConstraint::or(vec![
            ClockConstraint::Le(0, 1),
            ClockConstraint::and(vec![ClockConstraint::Ge(0, 1), ClockConstraint::Le(0, 2)]),
        ]);
        let e = erode_guard(&c, &q(1, 2), 1);
        assert!(member(&e, &[q(3, 2)]));
        assert!(!member(&e, &[q(8, 5)]));
        // eroding each disjunct on its own misses x in (1/2, 1)
        let lone = erode_guard(&ClockConstraint::Le(0, 1), &q(1, 2), 1);
        assert!(member(&e, &[q(3, 4)]) && !member(&lone, &[q(3, 4)]));
    }

    #[test]
    fn zero_erosion_is_identity() {
        let c = ClockConstraint::and(vec![ClockConstraint::gt(0, 1), ClockConstraint::lt(1, 2)]);
        let e = erode_guard(&c, &q(0, 1), 2);
        for a in 0..12 {
            for b in 0..12 {
                let v = [q(a, 4), q(b, 4)];
                assert_eq!(member(&e, &v), c.holds(&v));
            }
        }
    }
}

//! Property tests checking the symbolic layers against concrete arithmetic.

use proptest::prelude::*;

use tpg_core::harness::{random_game, random_parity_game, sample_region_semantics, RandomGameSpec};
use tpg_core::model::{elapse, parse_game, write_game, ClockConstraint, Q};
use tpg_core::parity::FiniteParityGame;
use tpg_core::regions::{next_region, region_of_valuation, reset, satisfies};
use tpg_core::robust::erode_guard;
use tpg_core::solver::{solve_zielonka, verify_solution};

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Valuations on a grid of eighths, below 4.5.
fn valuation(clocks: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((0i64..36).prop_map(|n| q(n, 8)), clocks)
}

fn ceilings(clocks: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..=3, clocks)
}

fn atom(clocks: usize) -> impl Strategy<Value = ClockConstraint> {
    (0..clocks, 0u64..=3, 0..4).prop_map(|(x, k, op)| match op {
        0 => ClockConstraint::Le(x, k),
        1 => ClockConstraint::Ge(x, k),
        2 => ClockConstraint::lt(x, k),
        _ => ClockConstraint::gt(x, k),
    })
}

fn constraint(clocks: usize) -> impl Strategy<Value = ClockConstraint> {
    atom(clocks).prop_recursive(3, 12, 3, move |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..3).prop_map(ClockConstraint::and),
            prop::collection::vec(inner.clone(), 1..3).prop_map(ClockConstraint::or),
            inner.prop_map(ClockConstraint::not),
        ]
    })
}

fn diff_constraint() -> impl Strategy<Value = ClockConstraint> {
    prop_oneof![constraint(2), (-2i64..=2).prop_map(|k| ClockConstraint::DiffLe(0, 1, k)), (-2i64..=2).prop_map(|k| ClockConstraint::DiffLe(1, 0, k)),]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn delay_reaches_region_by_time_successors(ceil in ceilings(2), v in valuation(2), d in (0i64..24).prop_map(|n| q(n, 8))) {
        let target = region_of_valuation(&ceil, 0, &elapse(&v, &d));
        let mut r = region_of_valuation(&ceil, 0, &v);
        let mut steps = 0;
        while r != target {
            r = next_region(&ceil, &r).expect("the delayed region lies ahead");
            steps += 1;
            prop_assert!(steps < 64);
        }
    }

    #[test]
    fn reset_commutes_with_regions(ceil in ceilings(3), v in valuation(3), mask in 0u8..8) {
        let clocks: Vec<usize> = (0..3).filter(|x| mask & (1 << x) != 0).collect();
        let mut w = v.clone();
        for &x in &clocks {
            w[x] = q(0, 1);
        }
        prop_assert_eq!(reset(&region_of_valuation(&ceil, 0, &v), &clocks), region_of_valuation(&ceil, 0, &w));
    }

    #[test]
    fn region_satisfaction_matches_points(v in valuation(2), c in constraint(2)) {
        let ceil = [3, 3];
        let r = region_of_valuation(&ceil, 0, &v);
        prop_assert_eq!(satisfies(&ceil, &r, &c).unwrap(), c.holds(&v));
    }

    #[test]
    fn after_reset_is_a_precondition(v in valuation(2), c in diff_constraint(), mask in 0u8..4) {
        let clocks: Vec<usize> = (0..2).filter(|x| mask & (1 << x) != 0).collect();
        let mut w = v.clone();
        for &x in &clocks {
            w[x] = q(0, 1);
        }
        prop_assert_eq!(c.after_reset(&clocks).holds(&v), c.holds(&w));
    }

    #[test]
    fn erosion_is_exact_and_monotone(v in valuation(2), c in diff_constraint(), a in 0i64..8, b in 0i64..8) {
        let (e1, e2) = (q(a.min(b), 8), q(a.max(b), 8));
        let small = erode_guard(&c, &e1, 2);
        let large = erode_guard(&c, &e2, 2);
        let inside = |zs: &[tpg_core::robust::zone::Zone]| zs.iter().any(|z| z.contains(&v));
        // every breakpoint of c along the diagonal lies on the grid of eighths
        let throughout = (0..=a.max(b)).all(|i| c.holds(&elapse(&v, &q(i, 8))));
        prop_assert_eq!(inside(&large), throughout);
        prop_assert!(!inside(&large) || inside(&small));
    }

    #[test]
    fn game_text_round_trips(seed in 0u64..10_000) {
        let g = random_game(&RandomGameSpec::new(seed));
        let again = parse_game(&write_game(&g)).unwrap();
        prop_assert_eq!(write_game(&again), write_game(&g));
        prop_assert_eq!(again, g);
    }

    #[test]
    fn pgsolver_round_trips(seed in 0u64..10_000) {
        let g = random_parity_game(seed, 30, 5);
        let (back, ids) = FiniteParityGame::parse_pgsolver(&g.to_pgsolver()).unwrap();
        prop_assert_eq!(ids, (0..g.len() as u64).collect::<Vec<_>>());
        prop_assert_eq!(&back.owner, &g.owner);
        prop_assert_eq!(&back.priority, &g.priority);
        for v in 0..g.len() as u32 {
            prop_assert_eq!(back.succ(v), g.succ(v));
        }
    }

    #[test]
    fn zielonka_strategies_are_winning(seed in 0u64..10_000) {
        let g = random_parity_game(seed, 40, 6);
        let sol = solve_zielonka(&g);
        prop_assert!(verify_solution(&g, &sol).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn concrete_moves_decompose_into_move_classes(seed in 0u64..10_000) {
        let g = random_game(&RandomGameSpec::new(seed));
        let rep = sample_region_semantics(&g, 100, seed).unwrap();
        prop_assert!(rep.divergences.is_empty(), "{:?}", rep.divergences.first());
    }
}

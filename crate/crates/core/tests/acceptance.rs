//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout.
//! Exits nonzero if any criterion fails.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use tpg_core::enlarged::Mode;
use tpg_core::fixtures::{self, ALL};
use tpg_core::harness::{brute_force_parity, cross_check, random_game, random_parity_game, sample_region_semantics, RandomGameSpec};
use tpg_core::model::{parse_game, ClockConstraint, TimedGame, Q};
use tpg_core::pipeline::{check_receptive, solve, SolveResult, SolverChoice, WinMode};
use tpg_core::regions::{count_regions, enumerate_regions, representative, Region};
use tpg_core::robust::zone::Zone;
use tpg_core::robust::{erode_guard, JitterParams};
use tpg_core::solver::{solve_spm, solve_zielonka};

/// One constructed instance, for the size-bound criterion.
struct Instance {
    what: String,
    clocks: usize,
    order: u32,
    regions: usize,
    ext: usize,
    finite: usize,
}

thread_local! {
    static INSTANCES: RefCell<Vec<Instance>> = const { RefCell::new(Vec::new()) };
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

fn bounded(jitter: Q) -> WinMode {
    WinMode::BoundedRobust(JitterParams::new(jitter, Q::from_integer(0.into())).unwrap())
}

/// Solves and records the instance sizes.
fn run(g: &TimedGame, mode: &WinMode) -> Result<SolveResult, String> {
    let r = solve(g, mode, SolverChoice::Zielonka).map_err(|e| format!("{}: {e}", g.name))?;
    let regions = count_regions(&r.game).map_err(|e| e.to_string())?;
    INSTANCES.with(|i| {
        i.borrow_mut().push(Instance {
            what: format!("{} {:?}", g.name, mode),
            clocks: r.game.clocks.len(),
            order: r.game.parity_order(),
            regions,
            ext: r.stats.ext_regions,
            finite: r.stats.finite_states,
        })
    });
    Ok(r)
}

fn verdict(r: &SolveResult, label: &str) -> Result<bool, String> {
    r.queries.iter().find(|v| v.label == label).map(|v| v.win).ok_or_else(|| format!("no query {label}"))
}

fn word(b: bool) -> &'static str {
    if b {
        "WIN"
    } else {
        "LOSE"
    }
}

fn load(text: &str) -> TimedGame {
    parse_game(text).expect("fixtures parse")
}

fn criterion(n: u32, name: &str, limit: Duration, failures: &mut u32, f: impl FnOnce() -> Result<String, String>) {
    let t = Instant::now();
    let outcome = f();
    let took = t.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; too slow")),
        Err(d) => (false, d),
    };
    if !ok {
        *failures += 1;
    }
    println!(
        "criterion {n:>2} {name}: {} ({detail}) [{:.1}s, limit {}s]",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs()
    );
}

fn expect(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Random games whose players both have receptive strategies.
fn well_formed_games(count: usize) -> Vec<TimedGame> {
    (0u64..)
        .map(|s| random_game(&RandomGameSpec::new(1000 + s)))
        .filter(|g| check_receptive(g).is_ok_and(|r| r.player1 && r.player2))
        .take(count)
        .collect()
}

fn erosion_corpus() -> Vec<(String, ClockConstraint)> {
    use ClockConstraint as C;
    let le = C::Le;
    let ge = C::Ge;
    vec![
        ("x<=1".into(), le(0, 1)),
        ("x>=1".into(), ge(0, 1)),
        ("x<1".into(), C::lt(0, 1)),
        ("x>2".into(), C::gt(0, 2)),
        ("x=1".into(), C::eq(0, 1)),
        ("1<=x<=2 && y<1".into(), C::and(vec![ge(0, 1), le(0, 2), C::lt(1, 1)])),
        ("x<=1 || 1<=x<=2".into(), C::or(vec![le(0, 1), C::and(vec![ge(0, 1), le(0, 2)])])),
        ("x<1 || x>1".into(), C::or(vec![C::lt(0, 1), C::gt(0, 1)])),
        ("!(1<=y<=2)".into(), C::not(C::and(vec![ge(1, 1), le(1, 2)]))),
        ("x-y<=1".into(), C::DiffLe(0, 1, 1)),
        ("x-y<=0 && y<=2".into(), C::and(vec![C::DiffLe(0, 1, 0), le(1, 2)])),
        ("true".into(), C::True),
    ]
}

fn member(zs: &[Zone], v: &[Q]) -> bool {
    zs.iter().any(|z| z.contains(v))
}

/// Whether `c` holds at every point of `v + [0, eps]`, checked on a fine grid
/// plus both endpoints.
fn holds_on_interval(c: &ClockConstraint, v: &[Q], eps: &Q) -> bool {
    let steps = 48;
    (0..=steps).all(|i| {
        let d = eps * q(i, steps);
        let w: Vec<Q> = v.iter().map(|a| a + &d).collect();
        c.holds(&w)
    })
}

fn main() {
    let mut failures = 0;
    let s = Duration::from_secs;

    criterion(1, "fig1 exact queries", s(10), &mut failures, || {
        let r = run(&load(fixtures::FIG1), &WinMode::Exact)?;
        let (o, one) = (verdict(&r, "origin")?, verdict(&r, "ones")?);
        expect(o && one, format!("x=y=0 {}, x=y=1 {}", word(o), word(one)))
    });

    criterion(2, "fig1 limit-robust queries", s(30), &mut failures, || {
        let r = run(&load(fixtures::FIG1), &WinMode::LimitRobust)?;
        let (o, one) = (verdict(&r, "origin")?, verdict(&r, "ones")?);
        expect(o && !one, format!("x=y=0 {}, x=y=1 {}", word(o), word(one)))
    });

    criterion(3, "fig1 bounded-robust queries", s(360), &mut failures, || {
        let g = load(fixtures::FIG1);
        let mut parts = Vec::new();
        let mut ok = true;
        for e in [q(1, 10), q(1, 4), q(1, 2)] {
            let t = Instant::now();
            let r = run(&g, &bounded(e.clone()))?;
            let o = verdict(&r, "origin")?;
            let slow = t.elapsed() > s(120);
            ok &= !o && !slow;
            parts.push(format!("eps={e}: x=y=0 {} in {:.1}s", word(o), t.elapsed().as_secs_f64()));
        }
        expect(ok, parts.join(", "))
    });

    criterion(4, "example-one-lemma region set at l0", s(10), &mut failures, || {
        let g = load(fixtures::EXAMPLE_ONE_LEMMA);
        let r = run(&g, &WinMode::Exact)?;
        let l0 = g.location_index("l0").unwrap() as u32;
        let x = g.clock_index("x").unwrap();
        let ceil = g.ceilings();
        let won: BTreeSet<Region> = r.winning_regions().filter(|reg| reg.loc == l0).cloned().collect();
        let want: BTreeSet<Region> = enumerate_regions(&g)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|reg| reg.loc == l0 && representative(&ceil, reg)[x] < q(4, 1))
            .collect();
        expect(won == want, format!("{} winning l0 regions, {} with x<4", won.len(), want.len()))
    });

    criterion(5, "open automaton loses robustly", s(30), &mut failures, || {
        let g = load(fixtures::OPEN_COUNTEREX);
        let front = |reg: &&Region| {
            let name = &g.locations[reg.loc as usize].name;
            name == "l0" || name == "l1"
        };
        let exact = run(&g, &WinMode::Exact)?.winning_regions().filter(front).count();
        let limit = run(&g, &WinMode::LimitRobust)?.winning_regions().filter(front).count();
        expect(exact > 0 && limit == 0, format!("l0/l1 winning regions: exact {exact}, limit-robust {limit}"))
    });

    criterion(6, "A^f and (A^f)* agree", s(300), &mut failures, || {
        let mut games: Vec<TimedGame> = ALL.iter().map(|(_, t)| load(t)).collect();
        games.extend((0..100).map(|seed| random_game(&RandomGameSpec::new(seed))));
        let mut mismatches = 0;
        let mut unsound = 0;
        let mut bad = Vec::new();
        for g in &games {
            let seeds = enumerate_regions(g).map_err(|e| e.to_string())?;
            let spm = seeds.len() <= 20;
            for mode in [Mode::Exact, Mode::LimitRobust] {
                let rep = cross_check(g, &seeds, mode, spm).map_err(|e| e.to_string())?;
                INSTANCES.with(|i| {
                    i.borrow_mut().push(Instance {
                        what: format!("{} {mode:?} cross-check", g.name),
                        clocks: g.clocks.len(),
                        order: g.parity_order(),
                        regions: seeds.len(),
                        ext: rep.ext_regions,
                        finite: rep.af_star_states,
                    })
                });
                mismatches += rep.mismatches.len();
                unsound += rep.unsound.len();
                if !rep.ok() {
                    bad.push(format!("{} {mode:?}", g.name));
                }
            }
        }
        expect(
            bad.is_empty(),
            format!("{} games x 2 modes, {mismatches} mismatching ExtRegions, {unsound} unsound strategies {bad:?}", games.len()),
        )
    });

    criterion(7, "solver oracle", s(60), &mut failures, || {
        let mut bad = Vec::new();
        for seed in 0..500 {
            let g = random_parity_game(seed, 8, 3);
            let b = brute_force_parity(&g).map_err(|e| e.to_string())?;
            let (z, p) = (solve_zielonka(&g), solve_spm(&g));
            if z.winner != b.winner || p.winner != b.winner {
                bad.push(seed);
            }
        }
        expect(bad.is_empty(), format!("500 games, mismatching seeds {bad:?}"))
    });

    criterion(8, "region semantics sampling", s(60), &mut failures, || {
        let mut parts = Vec::new();
        let mut ok = true;
        for (name, text) in ALL {
            let rep = sample_region_semantics(&load(text), 1000, 7).map_err(|e| e.to_string())?;
            ok &= rep.divergences.is_empty() && rep.joint_moves == 1000;
            parts.push(format!("{name} {}/{} ties {}", rep.divergences.len(), rep.joint_moves, rep.ties));
            if let Some(d) = rep.divergences.first() {
                parts.push(format!("first: {d}"));
            }
        }
        expect(ok, format!("divergences/joint moves: {}", parts.join(", ")))
    });

    criterion(9, "erosion properties", s(30), &mut failures, || {
        let eps = [q(0, 1), q(1, 4), q(1, 2), q(1, 1)];
        let grid: Vec<Vec<Q>> = (0..16).flat_map(|a| (0..16).map(move |b| vec![q(a, 4), q(b, 4)])).collect();
        let mut checks = 0;
        let mut bad = Vec::new();
        for (name, c) in erosion_corpus() {
            let eroded: Vec<Vec<Zone>> = eps.iter().map(|e| erode_guard(&c, e, 2)).collect();
            for v in &grid {
                for (i, e) in eps.iter().enumerate() {
                    checks += 1;
                    let inside = member(&eroded[i], v);
                    // soundness and exactness against the pointwise definition
                    if inside != holds_on_interval(&c, v, e) {
                        bad.push(format!("{name} eps={e} at {v:?}"));
                    }
                    if i == 0 && inside != c.holds(v) {
                        bad.push(format!("{name} f0 differs at {v:?}"));
                    }
                    if i > 0 && inside && !member(&eroded[i - 1], v) {
                        bad.push(format!("{name} not monotone at eps={e}, {v:?}"));
                    }
                }
            }
        }
        bad.truncate(3);
        expect(bad.is_empty(), format!("{checks} point checks over 12 constraints {bad:?}"))
    });

    criterion(10, "containment chain", s(600), &mut failures, || {
        let mut games: Vec<TimedGame> = ALL.iter().map(|(_, t)| load(t)).collect();
        games.extend(well_formed_games(50));
        let mut violations = Vec::new();
        let (mut strict_exact, mut strict_limit) = (false, false);
        for g in &games {
            let exact: BTreeSet<Region> = run(g, &WinMode::Exact)?.winning_regions().cloned().collect();
            let limit: BTreeSet<Region> = run(g, &WinMode::LimitRobust)?.winning_regions().cloned().collect();
            let robust = run(g, &bounded(q(1, 2)))?.winning_source_regions(g);
            if !limit.is_subset(&exact) {
                violations.push(format!("{}: limit not within exact", g.name));
            }
            if !robust.is_subset(&limit) {
                violations.push(format!("{}: bounded not within limit", g.name));
            }
            if g.name == "fig1" {
                strict_exact = limit.len() < exact.len();
                strict_limit = robust.len() < limit.len();
            }
        }
        expect(
            violations.is_empty() && strict_exact && strict_limit,
            format!(
                "{} games, violations {violations:?}, fig1 strict: limit<exact {strict_exact}, bounded(1/2)<limit {strict_limit}",
                games.len()
            ),
        )
    });

    criterion(11, "size bounds", s(1), &mut failures, || {
        let all = INSTANCES.with(|i| std::mem::take(&mut *i.borrow_mut()));
        let mut bad = Vec::new();
        let mut worst_ext = 0f64;
        for i in &all {
            let ext_bound = 32 * (i.clocks + 1) * i.order as usize * i.regions;
            worst_ext = worst_ext.max(i.ext as f64 / ext_bound as f64);
            if i.finite > 8 * i.ext {
                bad.push(format!("{}: {} finite states for {} ExtRegions", i.what, i.finite, i.ext));
            }
            if i.ext > ext_bound {
                bad.push(format!("{}: {} ExtRegions above {ext_bound}", i.what, i.ext));
            }
        }
        bad.truncate(3);
        expect(bad.is_empty(), format!("{} instances, largest ExtRegion ratio {worst_ext:.3} {bad:?}", all.len()))
    });

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

//! Small progress measures (Jurdziński), adapted to max-parity.
//!
//! A measure has one counter per odd priority, most significant first
//! (highest priority). Player 1 wins exactly where the least progress
//! measure is finite. Player 2's side is obtained from the dual game.
//!
//! Lifting works one strongly connected component at a time, sinks first.
//! Edges leaving a component lead to states already decided, so they are
//! redirected to two fixed sinks, one per winner. This keeps the counter
//! bounds local to the component.

use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::model::Player;
use crate::parity::{FiniteParityGame, ParityGameBuilder};

use super::Solution;

/// `None` is the top element.
type Measure = Option<Vec<u32>>;

struct Lattice {
    /// Odd priorities in decreasing order.
    odd: Vec<u32>,
    /// Number of states per odd priority, same order.
    bound: Vec<u32>,
}

impl Lattice {
    fn new(g: &FiniteParityGame) -> Lattice {
        let mut odd: Vec<u32> = g.priority.iter().copied().filter(|p| p % 2 == 1).collect();
        odd.sort_unstable_by(|a, b| b.cmp(a));
        odd.dedup();
        let bound = odd.iter().map(|&q| g.priority.iter().filter(|&&p| p == q).count() as u32).collect();
        Lattice { odd, bound }
    }

    /// Number of leading components that matter at priority `p`.
    fn width(&self, p: u32) -> usize {
        self.odd.iter().take_while(|&&q| q >= p).count()
    }

    /// Least measure `m` with `m ≥_p prev`, strictly greater when `p` is odd.
    fn prog(&self, prev: &Measure, p: u32) -> Measure {
        let prev = prev.as_ref()?;
        let w = self.width(p);
        let mut m = vec![0u32; self.odd.len()];
        m[..w].copy_from_slice(&prev[..w]);
        if p % 2 == 1 {
            let mut i = w;
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                if m[i] < self.bound[i] {
                    m[i] += 1;
                    break;
                }
                m[i] = 0;
            }
        }
        Some(m)
    }
}

fn cmp(a: &Measure, b: &Measure) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// Least progress measure and, for player 1, the minimizing successor.
fn lift(g: &FiniteParityGame) -> (Vec<Measure>, Vec<Option<u32>>) {
    let n = g.len();
    let lat = Lattice::new(g);
    let (pred_start, preds) = g.predecessors();
    let mut rho: Vec<Measure> = vec![Some(vec![0; lat.odd.len()]); n];
    let mut queued = vec![true; n];
    let mut work: VecDeque<u32> = (0..n as u32).collect();
    let best = |rho: &[Measure], v: u32| -> (Measure, u32) {
        let p = g.priority[v as usize];
        let mut it = g.succ(v).iter().map(|&w| (lat.prog(&rho[w as usize], p), w));
        let first = it.next().expect("total game");
        it.fold(first, |acc, cand| {
            let ord = cmp(&cand.0, &acc.0);
            let better = match g.owner[v as usize] {
                Player::P1 => ord == Ordering::Less || (ord == Ordering::Equal && cand.1 < acc.1),
                Player::P2 => ord == Ordering::Greater,
            };
            if better {
                cand
            } else {
                acc
            }
        })
    };
    while let Some(v) = work.pop_front() {
        queued[v as usize] = false;
        if rho[v as usize].is_none() {
            continue;
        }
        let (m, _) = best(&rho, v);
        if cmp(&m, &rho[v as usize]) == Ordering::Greater {
            rho[v as usize] = m;
            for &u in &preds[pred_start[v as usize]..pred_start[v as usize + 1]] {
                if !queued[u as usize] && rho[u as usize].is_some() {
                    queued[u as usize] = true;
                    work.push_back(u);
                }
            }
        }
    }
    let strategy = (0..n as u32)
        .map(|v| (g.owner[v as usize] == Player::P1 && rho[v as usize].is_some()).then(|| best(&rho, v).1))
        .collect();
    (rho, strategy)
}

fn solve_component(g: &FiniteParityGame) -> Solution {
    let (rho, s1) = lift(g);
    let (_, s2) = lift(&g.dual());
    let winner: Vec<Player> = rho.iter().map(|m| if m.is_some() { Player::P1 } else { Player::P2 }).collect();
    let strategy = (0..g.len())
        .map(|v| match (g.owner[v], winner[v]) {
            (Player::P1, Player::P1) => s1[v],
            (Player::P2, Player::P2) => s2[v],
            _ => None,
        })
        .collect();
    Solution { winner, strategy }
}

pub fn solve_spm(g: &FiniteParityGame) -> Solution {
    let n = g.len();
    let mut graph = petgraph::graph::DiGraph::<(), ()>::with_capacity(n, g.edge_count());
    for _ in 0..n {
        graph.add_node(());
    }
    for v in 0..n as u32 {
        for &w in g.succ(v) {
            graph.add_edge(v.into(), w.into(), ());
        }
    }
    let mut winner: Vec<Option<Player>> = vec![None; n];
    let mut strategy: Vec<Option<u32>> = vec![None; n];
    let mut local = vec![u32::MAX; n];
    // petgraph lists components in reverse topological order
    for comp in petgraph::algo::tarjan_scc(&graph) {
        let comp: Vec<u32> = comp.into_iter().map(|x| x.index() as u32).collect();
        for (i, &v) in comp.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let sink = |p: Player| comp.len() as u32 + if p == Player::P1 { 0 } else { 1 };
        let mut b = ParityGameBuilder::with_capacity(comp.len() + 2, 0);
        for &v in &comp {
            let mut succ: Vec<u32> = g
                .succ(v)
                .iter()
                .map(|&w| match winner[w as usize] {
                    Some(p) => sink(p),
                    None => local[w as usize],
                })
                .collect();
            succ.sort_unstable();
            succ.dedup();
            b.add_state(g.owner[v as usize], g.priority[v as usize], succ);
        }
        b.add_state(Player::P1, 0, [sink(Player::P1)]);
        b.add_state(Player::P1, 1, [sink(Player::P2)]);
        let sub = b.finish().expect("components of a total game are total");
        let sol = solve_component(&sub);
        for (i, &v) in comp.iter().enumerate() {
            let p = sol.winner[i];
            winner[v as usize] = Some(p);
            strategy[v as usize] = sol.strategy[i].map(|t| match comp.get(t as usize) {
                Some(&w) => w,
                None => *g
                    .succ(v)
                    .iter()
                    .filter(|&&w| local[w as usize] == u32::MAX && winner[w as usize] == Some(p))
                    .min()
                    .expect("sink choice has a decided successor"),
            });
        }
        for &v in &comp {
            local[v as usize] = u32::MAX;
        }
    }
    Solution { winner: winner.into_iter().map(|p| p.expect("every state is decided")).collect(), strategy }
}

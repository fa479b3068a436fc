//! Zielonka's recursive algorithm with attractor strategies.
//!
//! Subgames are tracked by marks: a state belongs to the subgame with mark
//! `m` iff `mark[v] == m`. Every recursive call first splits its subgame
//! into strongly connected components and solves them bottom-up, pulling
//! each component's winning regions into the rest by attractors; the
//! classical recursion then runs per component. Recursion depth is bounded
//! by twice the number of distinct priorities.

use crate::model::Player;
use crate::parity::FiniteParityGame;

use super::Solution;

const UNSEEN: u32 = u32::MAX;
const DONE: u32 = 0;

struct Ctx<'g> {
    g: &'g FiniteParityGame,
    pred_start: Vec<usize>,
    preds: Vec<u32>,
    mark: Vec<u32>,
    next_mark: u32,
    winner: Vec<Player>,
    strategy: Vec<Option<u32>>,
    /// Rank of a state in the attractor being computed.
    rank: Vec<u32>,
    /// Live successors not yet attracted, for opponent states; valid when `stamp` matches.
    remaining: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    tarjan: Tarjan,
}

pub fn solve_zielonka(g: &FiniteParityGame) -> Solution {
    let n = g.len();
    let (pred_start, preds) = g.predecessors();
    let mut ctx = Ctx {
        g,
        pred_start,
        preds,
        mark: vec![1; n],
        next_mark: 2,
        winner: vec![Player::P1; n],
        strategy: vec![None; n],
        rank: vec![UNSEEN; n],
        remaining: vec![0; n],
        stamp: vec![0; n],
        epoch: 0,
        tarjan: Tarjan::new(n),
    };
    let all: Vec<u32> = (0..n as u32).collect();
    ctx.solve(all, 1);
    for v in 0..n {
        if g.owner[v] != ctx.winner[v] {
            ctx.strategy[v] = None;
        }
    }
    Solution { winner: ctx.winner, strategy: ctx.strategy }
}

fn player_of(p: u32) -> Player {
    if p.is_multiple_of(2) {
        Player::P1
    } else {
        Player::P2
    }
}

impl Ctx<'_> {
    fn fresh_mark(&mut self, nodes: &[u32]) -> u32 {
        let m = self.next_mark;
        self.next_mark += 1;
        for &v in nodes {
            self.mark[v as usize] = m;
        }
        m
    }

    fn set_mark(&mut self, nodes: &[u32], m: u32) {
        for &v in nodes {
            self.mark[v as usize] = m;
        }
    }

    /// Attractor of `target` for `player` inside subgame `m`. Sets `player`'s
    /// strategy on attracted states and returns the attractor, targets first.
    fn attractor(&mut self, player: Player, target: &[u32], m: u32) -> Vec<u32> {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut out: Vec<u32> = target.to_vec();
        for &v in target {
            self.rank[v as usize] = 0;
        }
        let mut head = 0;
        while head < out.len() {
            let u = out[head];
            head += 1;
            let r = self.rank[u as usize];
            for i in self.pred_start[u as usize]..self.pred_start[u as usize + 1] {
                let v = self.preds[i];
                let vi = v as usize;
                if self.mark[vi] != m || self.rank[vi] != UNSEEN {
                    continue;
                }
                let take = if self.g.owner[vi] == player {
                    true
                } else {
                    if self.stamp[vi] != epoch {
                        self.stamp[vi] = epoch;
                        self.remaining[vi] = self.g.succ(v).iter().filter(|&&w| self.mark[w as usize] == m).count() as u32;
                    }
                    self.remaining[vi] -= 1;
                    self.remaining[vi] == 0
                };
                if take {
                    self.rank[vi] = r + 1;
                    out.push(v);
                }
            }
        }
        for &v in &out[target.len()..] {
            if self.g.owner[v as usize] == player {
                let r = self.rank[v as usize];
                let best = self
                    .g
                    .succ(v)
                    .iter()
                    .copied()
                    .filter(|&w| self.mark[w as usize] == m && self.rank[w as usize] < r)
                    .min()
                    .expect("attracted state has a closer successor");
                self.strategy[v as usize] = Some(best);
            }
        }
        for &v in &out {
            self.rank[v as usize] = UNSEEN;
        }
        out
    }

    /// Solves subgame `m`, whose states are exactly `nodes`. Marks of the
    /// states are clobbered; callers restore them.
    fn solve(&mut self, nodes: Vec<u32>, m: u32) {
        let sccs = self.tarjan.run(self.g, &self.mark, &nodes, m);
        if sccs.len() <= 1 {
            self.solve_core(nodes, m);
            return;
        }
        for scc in sccs {
            let part: Vec<u32> = scc.into_iter().filter(|&v| self.mark[v as usize] == m).collect();
            if part.is_empty() {
                continue;
            }
            let pm = self.fresh_mark(&part);
            self.solve_core(part.clone(), pm);
            self.set_mark(&part, m);
            for p in [Player::P1, Player::P2] {
                let won: Vec<u32> = part.iter().copied().filter(|&v| self.winner[v as usize] == p).collect();
                if won.is_empty() {
                    continue;
                }
                let a = self.attractor(p, &won, m);
                for &v in &a {
                    self.winner[v as usize] = p;
                    self.mark[v as usize] = DONE;
                }
            }
        }
    }

    /// The classical recursion on max priority.
    fn solve_core(&mut self, mut nodes: Vec<u32>, m: u32) {
        while !nodes.is_empty() {
            let p = nodes.iter().map(|&v| self.g.priority[v as usize]).max().unwrap();
            let me = player_of(p);
            let mut top: Vec<u32> = nodes.iter().copied().filter(|&v| self.g.priority[v as usize] == p).collect();
            top.sort_unstable();
            let a = self.attractor(me, &top, m);
            self.set_mark(&a, DONE);
            let rest: Vec<u32> = nodes.iter().copied().filter(|&v| self.mark[v as usize] == m).collect();
            if !rest.is_empty() {
                let sub = self.fresh_mark(&rest);
                self.solve(rest.clone(), sub);
            }
            self.set_mark(&a, m);
            self.set_mark(&rest, m);
            let mut theirs: Vec<u32> = rest.iter().copied().filter(|&v| self.winner[v as usize] != me).collect();
            if theirs.is_empty() {
                for &v in &nodes {
                    self.winner[v as usize] = me;
                }
                for &v in &top {
                    if self.g.owner[v as usize] == me {
                        let s = self.g.succ(v).iter().copied().filter(|&w| self.mark[w as usize] == m).min();
                        self.strategy[v as usize] = s;
                    }
                }
                return;
            }
            theirs.sort_unstable();
            let b = self.attractor(me.opponent(), &theirs, m);
            for &v in &b {
                self.winner[v as usize] = me.opponent();
                self.mark[v as usize] = DONE;
            }
            nodes.retain(|&v| self.mark[v as usize] == m);
        }
    }
}

/// Iterative Tarjan restricted to one subgame; reusable scratch space.
struct Tarjan {
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Tarjan {
    fn new(n: usize) -> Tarjan {
        Tarjan { index: vec![0; n], low: vec![0; n], on_stack: vec![false; n], stamp: vec![0; n], epoch: 0 }
    }

    /// Components of the subgame, sinks first.
    fn run(&mut self, g: &FiniteParityGame, mark: &[u32], nodes: &[u32], m: u32) -> Vec<Vec<u32>> {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut counter = 0u32;
        let mut stack: Vec<u32> = Vec::new();
        let mut out: Vec<Vec<u32>> = Vec::new();
        let mut call: Vec<(u32, usize)> = Vec::new();
        for &root in nodes {
            if self.stamp[root as usize] == epoch {
                continue;
            }
            call.push((root, 0));
            self.stamp[root as usize] = epoch;
            self.index[root as usize] = counter;
            self.low[root as usize] = counter;
            counter += 1;
            stack.push(root);
            self.on_stack[root as usize] = true;
            while let Some(&mut (v, ref mut i)) = call.last_mut() {
                let succ = g.succ(v);
                if *i < succ.len() {
                    let w = succ[*i];
                    *i += 1;
                    let wi = w as usize;
                    if mark[wi] != m {
                        continue;
                    }
                    if self.stamp[wi] != epoch {
                        self.stamp[wi] = epoch;
                        self.index[wi] = counter;
                        self.low[wi] = counter;
                        counter += 1;
                        stack.push(w);
                        self.on_stack[wi] = true;
                        call.push((w, 0));
                    } else if self.on_stack[wi] {
                        self.low[v as usize] = self.low[v as usize].min(self.index[wi]);
                    }
                    continue;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    self.low[parent as usize] = self.low[parent as usize].min(self.low[v as usize]);
                }
                if self.low[v as usize] == self.index[v as usize] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        self.on_stack[w as usize] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
        out
    }
}

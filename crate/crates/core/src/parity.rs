//! Finite turn-based parity games (max-parity; player 1 wins even).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::Player;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParityGameError {
    #[error("state {0} has no successor")]
    DeadEnd(u32),
    #[error("state {state} has a successor {target} that does not exist")]
    DanglingEdge { state: u32, target: u32 },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("game has {size} states, more than the limit of {limit}")]
    TooLarge { size: usize, limit: usize },
}

/// A total game graph stored in compressed adjacency form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteParityGame {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    /// Optional per-state labels; empty when the game is unlabelled.
    pub labels: Vec<String>,
    start: Vec<usize>,
    succ: Vec<u32>,
}

/// Incremental constructor; states are added in index order, successors
/// may refer to states added later.
#[derive(Default)]
pub struct ParityGameBuilder {
    owner: Vec<Player>,
    priority: Vec<u32>,
    labels: Vec<String>,
    start: Vec<usize>,
    succ: Vec<u32>,
}

impl ParityGameBuilder {
    pub fn new() -> Self {
        ParityGameBuilder { start: vec![0], ..Default::default() }
    }

    pub fn with_capacity(states: usize, edges: usize) -> Self {
        let mut start = Vec::with_capacity(states + 1);
        start.push(0);
        ParityGameBuilder {
            owner: Vec::with_capacity(states),
            priority: Vec::with_capacity(states),
            labels: Vec::new(),
            start,
            succ: Vec::with_capacity(edges),
        }
    }

    /// Adds a state and returns its index.
    pub fn add_state(&mut self, owner: Player, priority: u32, succ: impl IntoIterator<Item = u32>) -> u32 {
        self.owner.push(owner);
        self.priority.push(priority);
        self.succ.extend(succ);
        self.start.push(self.succ.len());
        (self.owner.len() - 1) as u32
    }

    pub fn add_labelled_state(&mut self, owner: Player, priority: u32, succ: impl IntoIterator<Item = u32>, label: String) -> u32 {
        self.labels.resize(self.owner.len(), String::new());
        self.labels.push(label);
        self.add_state(owner, priority, succ)
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    /// Checks totality and edge targets.
    pub fn finish(mut self) -> Result<FiniteParityGame, ParityGameError> {
        let n = self.owner.len();
        for v in 0..n {
            let s = &self.succ[self.start[v]..self.start[v + 1]];
            if s.is_empty() {
                return Err(ParityGameError::DeadEnd(v as u32));
            }
            if let Some(&t) = s.iter().find(|&&t| t as usize >= n) {
                return Err(ParityGameError::DanglingEdge { state: v as u32, target: t });
            }
        }
        if !self.labels.is_empty() {
            self.labels.resize(n, String::new());
        }
        Ok(FiniteParityGame { owner: self.owner, priority: self.priority, labels: self.labels, start: self.start, succ: self.succ })
    }
}

impl FiniteParityGame {
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn succ(&self, v: u32) -> &[u32] {
        &self.succ[self.start[v as usize]..self.start[v as usize + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.len()
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    pub fn label(&self, v: u32) -> Option<&str> {
        self.labels.get(v as usize).map(String::as_str).filter(|s| !s.is_empty())
    }

    /// Reverse adjacency in compressed form: `(start, preds)`.
    pub fn predecessors(&self) -> (Vec<usize>, Vec<u32>) {
        let n = self.len();
        let mut count = vec![0usize; n + 1];
        for &t in &self.succ {
            count[t as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut preds = vec![0u32; self.succ.len()];
        for v in 0..n as u32 {
            for &t in self.succ(v) {
                preds[fill[t as usize]] = v;
                fill[t as usize] += 1;
            }
        }
        (count, preds)
    }

    /// The same arena with owners exchanged and every priority raised by one,
    /// so that player 1 of the dual wins exactly where player 2 wins here.
    pub fn dual(&self) -> FiniteParityGame {
        FiniteParityGame {
            owner: self.owner.iter().map(|p| p.opponent()).collect(),
            priority: self.priority.iter().map(|p| p + 1).collect(),
            labels: self.labels.clone(),
            start: self.start.clone(),
            succ: self.succ.clone(),
        }
    }

    /// PGSolver text. Player 1 is owner `0`; the header carries the largest id.
    pub fn to_pgsolver(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "parity {};", self.len().saturating_sub(1));
        for v in 0..self.len() as u32 {
            let succ: Vec<String> = self.succ(v).iter().map(u32::to_string).collect();
            let owner = match self.owner[v as usize] {
                Player::P1 => 0,
                Player::P2 => 1,
            };
            let _ = write!(out, "{} {} {} {}", v, self.priority[v as usize], owner, succ.join(","));
            if let Some(l) = self.label(v) {
                let _ = write!(out, " \"{}\"", l.replace('"', "'"));
            }
            out.push_str(";\n");
        }
        out
    }

    /// Parses PGSolver text. Ids may be sparse; they are renumbered densely
    /// in increasing order, and the returned vector maps new index to old id.
    pub fn parse_pgsolver(text: &str) -> Result<(FiniteParityGame, Vec<u64>), ParityGameError> {
        struct Raw {
            priority: u32,
            owner: Player,
            succ: Vec<u64>,
            label: String,
        }
        let mut raw: BTreeMap<u64, Raw> = BTreeMap::new();
        let err = |line: usize, message: &str| ParityGameError::Syntax { line, message: message.to_string() };
        for (i, full) in text.lines().enumerate() {
            let line = i + 1;
            let t = full.trim();
            if t.is_empty() {
                continue;
            }
            let t = t.strip_suffix(';').ok_or_else(|| err(line, "missing ';'"))?.trim();
            if t.starts_with("parity") || t.starts_with("start") {
                continue;
            }
            let (body, label) = match t.find('"') {
                Some(q) => {
                    let rest = &t[q + 1..];
                    let end = rest.rfind('"').ok_or_else(|| err(line, "unterminated label"))?;
                    (&t[..q], rest[..end].to_string())
                }
                None => (t, String::new()),
            };
            let parts: Vec<&str> = body.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(err(line, "expected `<id> <priority> <owner> <successors>`"));
            }
            let num = |s: &str| s.parse::<u64>().map_err(|_| err(line, &format!("bad number `{s}`")));
            let id = num(parts[0])?;
            let priority = u32::try_from(num(parts[1])?).map_err(|_| err(line, "priority too large"))?;
            let owner = match parts[2] {
                "0" => Player::P1,
                "1" => Player::P2,
                o => return Err(err(line, &format!("bad owner `{o}`"))),
            };
            let succ = parts[3].split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            if raw.insert(id, Raw { priority, owner, succ, label }).is_some() {
                return Err(err(line, &format!("duplicate id {id}")));
            }
        }
        let ids: Vec<u64> = raw.keys().copied().collect();
        let index: BTreeMap<u64, u32> = ids.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();
        let mut b = ParityGameBuilder::new();
        let labelled = raw.values().any(|r| !r.label.is_empty());
        for (id, r) in raw {
            let succ = r
                .succ
                .iter()
                .map(|s| index.get(s).copied().ok_or(ParityGameError::DanglingEdge { state: id as u32, target: *s as u32 }))
                .collect::<Result<Vec<_>, _>>()?;
            if labelled {
                b.add_labelled_state(r.owner, r.priority, succ, r.label);
            } else {
                b.add_state(r.owner, r.priority, succ);
            }
        }
        Ok((b.finish()?, ids))
    }

    /// Graphviz rendering: player 1 states are boxes, player 2 states diamonds.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph parity {\n");
        for v in 0..self.len() as u32 {
            let shape = match self.owner[v as usize] {
                Player::P1 => "box",
                Player::P2 => "diamond",
            };
            let text = match self.label(v) {
                Some(l) => format!("{v}: {}\\nprio {}", l.replace('"', "'"), self.priority[v as usize]),
                None => format!("{v}\\nprio {}", self.priority[v as usize]),
            };
            let _ = writeln!(out, "  s{v} [shape={shape}, label=\"{text}\"];");
        }
        for v in 0..self.len() as u32 {
            for &t in self.succ(v) {
                let _ = writeln!(out, "  s{v} -> s{t};");
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FiniteParityGame {
        let mut b = ParityGameBuilder::new();
        b.add_labelled_state(Player::P1, 2, [1], "a".into());
        b.add_labelled_state(Player::P2, 1, [0, 1], "b".into());
        b.finish().unwrap()
    }

    #[test]
    fn dead_ends_are_rejected() {
        let mut b = ParityGameBuilder::new();
        b.add_state(Player::P1, 0, []);
        assert_eq!(b.finish(), Err(ParityGameError::DeadEnd(0)));
        let mut b = ParityGameBuilder::new();
        b.add_state(Player::P1, 0, [3]);
        assert!(matches!(b.finish(), Err(ParityGameError::DanglingEdge { .. })));
    }

    #[test]
    fn pgsolver_round_trip() {
        let g = small();
        let text = g.to_pgsolver();
        assert_eq!(text, "parity 1;\n0 2 0 1 \"a\";\n1 1 1 0,1 \"b\";\n");
        let (h, ids) = FiniteParityGame::parse_pgsolver(&text).unwrap();
        assert_eq!(h, g);
        assert_eq!(ids, vec![0, 1]);
    }

    #[test]
    fn sparse_ids_are_renumbered() {
        let (g, ids) = FiniteParityGame::parse_pgsolver("parity 9;\nstart 9;\n9 0 1 4;\n4 3 0 9,4;\n").unwrap();
        assert_eq!(ids, vec![4, 9]);
        assert_eq!(g.succ(0), &[1, 0]);
        assert_eq!(g.succ(1), &[0]);
        assert_eq!(g.owner, vec![Player::P1, Player::P2]);
    }

    #[test]
    fn malformed_pgsolver_is_rejected() {
        assert!(FiniteParityGame::parse_pgsolver("0 1 0 0").is_err());
        assert!(FiniteParityGame::parse_pgsolver("0 1 2 0;").is_err());
        assert!(FiniteParityGame::parse_pgsolver("0 1 0 5;").is_err());
    }

    #[test]
    fn predecessors_invert_successors() {
        let g = small();
        let (start, preds) = g.predecessors();
        assert_eq!(&preds[start[0]..start[1]], &[1]);
        assert_eq!(&preds[start[1]..start[2]], &[0, 1]);
    }

    #[test]
    fn dual_flips_everything() {
        let d = small().dual();
        assert_eq!(d.owner, vec![Player::P2, Player::P1]);
        assert_eq!(d.priority, vec![3, 2]);
    }
}

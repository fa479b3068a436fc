use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ClockConstraint, ModelError, Q};

/// One of the two players. Player 1 is the controller and wins even parities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::P1 => "p1",
            Player::P2 => "p2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clock {
    pub name: String,
    /// Largest constant the region abstraction distinguishes for this clock.
    pub ceiling: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub parity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub owner: Player,
    pub action: String,
    pub guard: ClockConstraint,
    pub target: usize,
    /// Reset clocks, sorted by index.
    pub resets: Vec<usize>,
    /// Who is blamed when this edge is taken; `None` means the owner.
    pub blame_as: Option<Player>,
}

impl Edge {
    pub fn blamed(&self) -> Player {
        self.blame_as.unwrap_or(self.owner)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryState {
    pub label: String,
    pub location: usize,
    pub valuation: Vec<Q>,
}

/// A timed automaton game with a location parity function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedGame {
    pub name: String,
    pub clocks: Vec<Clock>,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
    pub states: Vec<QueryState>,
    /// Whether player 1 may play the relinquishing move.
    pub relinquish: bool,
}

impl TimedGame {
    pub fn new(name: impl Into<String>) -> Self {
        TimedGame {
            name: name.into(),
            clocks: Vec::new(),
            locations: Vec::new(),
            edges: Vec::new(),
            states: Vec::new(),
            relinquish: true,
        }
    }

    pub fn clock_names(&self) -> Vec<String> {
        self.clocks.iter().map(|c| c.name.clone()).collect()
    }

    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c.name == name)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn ceilings(&self) -> Vec<u64> {
        self.clocks.iter().map(|c| c.ceiling).collect()
    }

    /// Order of the parity function: one more than the largest parity.
    pub fn parity_order(&self) -> u32 {
        self.locations.iter().map(|l| l.parity + 1).max().unwrap_or(1)
    }

    pub fn edges_from(&self, loc: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.source == loc)
    }

    pub fn actions(&self, player: Player) -> Vec<String> {
        let mut seen = HashSet::new();
        self.edges
            .iter()
            .filter(|e| e.owner == player)
            .filter(|e| seen.insert(e.action.clone()))
            .map(|e| e.action.clone())
            .collect()
    }

    fn constraints(&self) -> impl Iterator<Item = &ClockConstraint> {
        self.locations.iter().map(|l| &l.invariant).chain(self.edges.iter().map(|e| &e.guard))
    }

    /// Raises every ceiling to the largest constant compared with its clock.
    pub fn raise_ceilings(&mut self) {
        for x in 0..self.clocks.len() {
            let m = self.constraints().filter_map(|c| c.max_constant(x)).max().unwrap_or(0);
            let c = &mut self.clocks[x];
            c.ceiling = c.ceiling.max(m).max(1);
        }
    }

    /// Checks the structural invariants of a game.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = HashSet::new();
        for c in &self.clocks {
            if !names.insert(c.name.as_str()) {
                return Err(ModelError::Duplicate(c.name.clone()));
            }
        }
        let mut locs = HashSet::new();
        for l in &self.locations {
            if !locs.insert(l.name.as_str()) {
                return Err(ModelError::Duplicate(l.name.clone()));
            }
        }
        let n = self.clocks.len();
        for c in self.constraints() {
            if let Some(&x) = c.clocks().iter().find(|&&x| x >= n) {
                return Err(ModelError::UndeclaredClock(format!("#{x}")));
            }
            for x in c.clocks() {
                if c.max_constant(x).unwrap_or(0) > self.clocks[x].ceiling {
                    return Err(ModelError::ConstantAboveCeiling(self.clocks[x].name.clone()));
                }
            }
        }
        let mut owners: HashMap<&str, Player> = HashMap::new();
        let mut keys = HashSet::new();
        for e in &self.edges {
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                return Err(ModelError::UndeclaredLocation(format!("#{}", e.source.max(e.target))));
            }
            if e.resets.iter().any(|&x| x >= n) {
                return Err(ModelError::UndeclaredClock("reset".into()));
            }
            if *owners.entry(e.action.as_str()).or_insert(e.owner) != e.owner {
                return Err(ModelError::SharedAction(e.action.clone()));
            }
            if !keys.insert((e.source, e.action.as_str())) {
                return Err(ModelError::DuplicateEdge {
                    location: self.locations[e.source].name.clone(),
                    action: e.action.clone(),
                });
            }
        }
        for s in &self.states {
            self.check_state(s.location, &s.valuation, &s.label)?;
        }
        Ok(())
    }

    /// Validates a concrete state: arity, nonnegativity and the invariant.
    pub fn check_state(&self, loc: usize, v: &[Q], label: &str) -> Result<(), ModelError> {
        if loc >= self.locations.len() {
            return Err(ModelError::UndeclaredLocation(label.to_string()));
        }
        if v.len() != self.clocks.len() {
            return Err(ModelError::MissingClock(v.len().min(self.clocks.len())));
        }
        if v.iter().any(|q| *q < Q::from_integer(0.into())) {
            return Err(ModelError::NegativeValue(label.to_string()));
        }
        if !self.locations[loc].invariant.holds(v) {
            return Err(ModelError::InvariantViolated(label.to_string()));
        }
        Ok(())
    }

    /// Copy with the two players exchanged (including blame overrides) and
    /// the relinquishing move disabled.
    pub fn swapped_roles(&self) -> TimedGame {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.owner = e.owner.opponent();
            e.blame_as = e.blame_as.map(Player::opponent);
        }
        g.relinquish = false;
        g
    }
}

//! The line-oriented `.tg` game format.
//!
//! ```text
//! game <name>
//! clock <id> [max <int>]
//! loc <id> [invariant "<constraint>"] parity <int>
//! edge p1|p2 <action> from <loc> to <loc> [guard "<constraint>"] [reset <id>,<id>|-] [blame p1|p2]
//! state <label> <loc> <clock>=<rational>, ...
//! relinquish off
//! ```
//!
//! `#` starts a comment outside quotes. Declarations may appear in any order.

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::Zero;

use super::{parse_constraint, Clock, ClockConstraint, Edge, Location, ModelError, Player, QueryState, TimedGame, Q};

const MAX_PARITY: u64 = 64;

#[derive(Debug)]
struct Token {
    text: String,
    column: usize,
    quoted: bool,
}

struct Line {
    number: usize,
    tokens: Vec<Token>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax { line, column, message: message.into() }
}

fn tokenize(number: usize, raw: &str) -> Result<Line, ModelError> {
    let mut tokens = Vec::new();
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '"' {
            let mut text = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(number, pos + 1, "unterminated string")),
                    Some((_, '"')) => break,
                    Some((_, ch)) => text.push(*ch),
                }
                i += 1;
            }
            i += 1;
            tokens.push(Token { text, column: pos + 1, quoted: true });
        } else {
            let mut text = String::new();
            while let Some(&(_, ch)) = chars.get(i) {
                if ch.is_whitespace() || ch == '#' || ch == '"' {
                    break;
                }
                text.push(ch);
                i += 1;
            }
            tokens.push(Token { text, column: pos + 1, quoted: false });
        }
    }
    Ok(Line { number, tokens })
}

fn is_ident(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && it.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\'')
}

/// Parses a nonnegative rational written `p/q` or as an integer.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() || s.starts_with('-') || s.starts_with('+') {
        return None;
    }
    let q = Q::from_str(s).ok()?;
    (q >= Q::zero()).then_some(q)
}

struct Cursor<'a> {
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err_here(&self, msg: impl Into<String>) -> ModelError {
        let col = self.line.tokens.get(self.pos).map_or_else(
            || self.line.tokens.last().map_or(1, |t| t.column + t.text.len()),
            |t| t.column,
        );
        syntax(self.line.number, col, msg)
    }

    fn next(&mut self, what: &str) -> Result<&'a Token, ModelError> {
        let t = self.line.tokens.get(self.pos).ok_or_else(|| self.err_here(format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn ident(&mut self, what: &str) -> Result<&'a Token, ModelError> {
        let t = self.next(what)?;
        if t.quoted || !is_ident(&t.text) {
            self.pos -= 1;
            return Err(self.err_here(format!("expected {what}")));
        }
        Ok(t)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ModelError> {
        let t = self.next(&format!("'{kw}'"))?;
        if t.quoted || t.text != kw {
            self.pos -= 1;
            return Err(self.err_here(format!("expected '{kw}'")));
        }
        Ok(())
    }

    fn peek_is(&self, kw: &str) -> bool {
        self.line.tokens.get(self.pos).is_some_and(|t| !t.quoted && t.text == kw)
    }

    fn done(&self) -> bool {
        self.pos >= self.line.tokens.len()
    }

    fn int(&mut self, what: &str) -> Result<u64, ModelError> {
        let t = self.next(what)?;
        t.text.parse().map_err(|_| syntax(self.line.number, t.column, format!("expected {what}")))
    }

    fn quoted(&mut self, what: &str) -> Result<&'a Token, ModelError> {
        let t = self.next(what)?;
        if !t.quoted {
            self.pos -= 1;
            return Err(self.err_here(format!("expected quoted {what}")));
        }
        Ok(t)
    }
}

fn constraint(g: &TimedGame, line: usize, tok: &Token) -> Result<ClockConstraint, ModelError> {
    parse_constraint(&tok.text, &|n| g.clock_index(n))
        .map_err(|e| syntax(line, tok.column + 1 + e.offset, e.message))
}

fn player(line: usize, tok: &Token) -> Result<Player, ModelError> {
    match tok.text.as_str() {
        "p1" => Ok(Player::P1),
        "p2" => Ok(Player::P2),
        _ => Err(syntax(line, tok.column, "expected 'p1' or 'p2'")),
    }
}

/// Parses a `.tg` document into a validated game.
pub fn parse_game(text: &str) -> Result<TimedGame, ModelError> {
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .map(|(i, l)| tokenize(i + 1, l))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|l| !l.tokens.is_empty())
        .collect();

    let mut g = TimedGame::new("");
    let mut named = false;
    let mut explicit_max = Vec::new();
    for line in &lines {
        let mut c = Cursor { line, pos: 0 };
        let head = c.next("declaration")?;
        match head.text.as_str() {
            "game" => {
                if named {
                    return Err(syntax(line.number, head.column, "duplicate 'game' line"));
                }
                g.name = c.ident("game name")?.text.clone();
                named = true;
            }
            "clock" => {
                let name = c.ident("clock name")?;
                if g.clock_index(&name.text).is_some() {
                    return Err(ModelError::Duplicate(name.text.clone()));
                }
                let mut max = 0;
                if c.peek_is("max") {
                    c.keyword("max")?;
                    max = c.int("ceiling")?;
                }
                explicit_max.push(max);
                g.clocks.push(Clock { name: name.text.clone(), ceiling: 1 });
            }
            "loc" | "edge" | "state" | "relinquish" => {}
            other => return Err(syntax(line.number, head.column, format!("unknown declaration '{other}'"))),
        }
        if !matches!(head.text.as_str(), "loc" | "edge" | "state" | "relinquish") && !c.done() {
            return Err(c.err_here("unexpected token"));
        }
    }
    if !named {
        return Err(syntax(1, 1, "missing 'game <name>' line"));
    }

    for line in lines.iter().filter(|l| l.tokens[0].text == "loc") {
        let mut c = Cursor { line, pos: 1 };
        let name = c.ident("location name")?;
        if g.location_index(&name.text).is_some() {
            return Err(ModelError::Duplicate(name.text.clone()));
        }
        let mut invariant = ClockConstraint::True;
        if c.peek_is("invariant") {
            c.keyword("invariant")?;
            invariant = constraint(&g, line.number, c.quoted("constraint")?)?;
        }
        c.keyword("parity")?;
        let parity = c.int("parity")?;
        if parity >= MAX_PARITY {
            return Err(ModelError::ParityOutOfRange(parity));
        }
        if !c.done() {
            return Err(c.err_here("unexpected token"));
        }
        g.locations.push(Location { name: name.text.clone(), invariant, parity: parity as u32 });
    }

    let loc = |g: &TimedGame, tok: &Token| g.location_index(&tok.text).ok_or_else(|| ModelError::UndeclaredLocation(tok.text.clone()));
    for line in &lines {
        let mut c = Cursor { line, pos: 1 };
        match line.tokens[0].text.as_str() {
            "edge" => {
                let owner = player(line.number, c.next("owner")?)?;
                let action = c.ident("action")?.text.clone();
                c.keyword("from")?;
                let source = loc(&g, c.ident("location")?)?;
                c.keyword("to")?;
                let target = loc(&g, c.ident("location")?)?;
                let mut edge = Edge { source, owner, action, guard: ClockConstraint::True, target, resets: vec![], blame_as: None };
                while !c.done() {
                    let kw = c.next("edge attribute")?;
                    match kw.text.as_str() {
                        "guard" => edge.guard = constraint(&g, line.number, c.quoted("constraint")?)?,
                        "reset" => {
                            let list = c.next("reset list")?;
                            if list.text != "-" {
                                for name in list.text.split(',') {
                                    let x = g.clock_index(name.trim()).ok_or_else(|| ModelError::UndeclaredClock(name.to_string()))?;
                                    edge.resets.push(x);
                                }
                            }
                        }
                        "blame" => edge.blame_as = Some(player(line.number, c.next("player")?)?),
                        _ => return Err(syntax(line.number, kw.column, format!("unknown edge attribute '{}'", kw.text))),
                    }
                }
                edge.resets.sort_unstable();
                edge.resets.dedup();
                if edge.blame_as == Some(edge.owner) {
                    edge.blame_as = None;
                }
                g.edges.push(edge);
            }
            "state" => {
                let label = c.ident("state label")?.text.clone();
                let location = loc(&g, c.ident("location")?)?;
                let mut valuation = vec![Q::zero(); g.clocks.len()];
                let rest: Vec<&str> = line.tokens[c.pos..].iter().map(|t| t.text.as_str()).collect();
                let joined = rest.join(" ");
                for part in joined.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let (name, value) = part
                        .split_once('=')
                        .ok_or_else(|| syntax(line.number, line.tokens[c.pos.min(line.tokens.len() - 1)].column, format!("expected clock=value, got '{part}'")))?;
                    let x = g.clock_index(name.trim()).ok_or_else(|| ModelError::UndeclaredClock(name.trim().to_string()))?;
                    valuation[x] = parse_rational(value)
                        .ok_or_else(|| syntax(line.number, line.tokens[c.pos.min(line.tokens.len() - 1)].column, format!("bad rational '{value}'")))?;
                }
                g.states.push(QueryState { label, location, valuation });
            }
            "relinquish" => {
                let t = c.next("'on' or 'off'")?;
                g.relinquish = match t.text.as_str() {
                    "on" => true,
                    "off" => false,
                    _ => return Err(syntax(line.number, t.column, "expected 'on' or 'off'")),
                };
            }
            _ => {}
        }
    }

    for (x, m) in explicit_max.into_iter().enumerate() {
        g.clocks[x].ceiling = m.max(1);
    }
    g.raise_ceilings();
    g.validate()?;
    Ok(g)
}

/// Serializes a game in canonical order: clocks, locations, edges, states.
pub fn write_game(g: &TimedGame) -> String {
    let names = g.clock_names();
    let mut out = String::new();
    let _ = writeln!(out, "game {}", g.name);
    for c in &g.clocks {
        let _ = writeln!(out, "clock {} max {}", c.name, c.ceiling);
    }
    for l in &g.locations {
        let _ = write!(out, "loc {}", l.name);
        if l.invariant != ClockConstraint::True {
            let _ = write!(out, " invariant \"{}\"", l.invariant.display(&names));
        }
        let _ = writeln!(out, " parity {}", l.parity);
    }
    for e in &g.edges {
        let _ = write!(
            out,
            "edge {} {} from {} to {}",
            e.owner, e.action, g.locations[e.source].name, g.locations[e.target].name
        );
        if e.guard != ClockConstraint::True {
            let _ = write!(out, " guard \"{}\"", e.guard.display(&names));
        }
        if !e.resets.is_empty() {
            let list: Vec<&str> = e.resets.iter().map(|&x| names[x].as_str()).collect();
            let _ = write!(out, " reset {}", list.join(","));
        }
        if let Some(p) = e.blame_as {
            let _ = write!(out, " blame {p}");
        }
        out.push('\n');
    }
    for s in &g.states {
        let vals: Vec<String> = s.valuation.iter().zip(&names).map(|(v, n)| format!("{n}={v}")).collect();
        let _ = writeln!(out, "state {} {} {}", s.label, g.locations[s.location].name, vals.join(", "));
    }
    if !g.relinquish {
        out.push_str("relinquish off\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# sample\ngame g\nclock x max 3\nclock y\n\
        loc l0 invariant \"x<=3\" parity 0\nloc l1 parity 1\n\
        edge p1 a from l0 to l1 guard \"x<1 || y>1\" reset x,y\n\
        edge p2 b from l1 to l0 reset - blame p1\n\
        state s0 l0 x=1/2, y=0\n";

    #[test]
    fn parses_sample() {
        let g = parse_game(SAMPLE).unwrap();
        assert_eq!(g.clocks.len(), 2);
        assert_eq!(g.clocks[0].ceiling, 3);
        assert_eq!(g.clocks[1].ceiling, 1);
        assert_eq!(g.edges[0].resets, vec![0, 1]);
        assert_eq!(g.edges[1].blame_as, Some(Player::P1));
        assert_eq!(g.states[0].valuation[0], Q::new(1.into(), 2.into()));
    }

    #[test]
    fn round_trip() {
        let g = parse_game(SAMPLE).unwrap();
        let text = write_game(&g);
        assert_eq!(parse_game(&text).unwrap(), g);
        assert_eq!(write_game(&parse_game(&text).unwrap()), text);
    }

    #[test]
    fn degenerate_game() {
        let g = parse_game("game g\nloc l0 parity 0\n").unwrap();
        assert_eq!(g.locations.len(), 1);
        assert!(g.clocks.is_empty() && g.edges.is_empty());
    }

    #[test]
    fn ceiling_is_raised_to_constants() {
        let g = parse_game("game g\nclock x max 1\nloc l parity 0\nedge p1 a from l to l guard \"x>=4\"\n").unwrap();
        assert_eq!(g.clocks[0].ceiling, 4);
    }

    #[test]
    fn errors() {
        let undeclared = parse_game("game g\nloc l0 parity 0\nedge p1 a from l0 to l9\n");
        assert_eq!(undeclared, Err(ModelError::UndeclaredLocation("l9".into())));
        let dup = parse_game("game g\nloc l0 parity 0\nedge p1 a from l0 to l0\nedge p1 a from l0 to l0 guard \"true\"\n");
        assert!(matches!(dup, Err(ModelError::DuplicateEdge { .. })));
        let shared = parse_game("game g\nloc l0 parity 0\nloc l1 parity 0\nedge p1 a from l0 to l0\nedge p2 a from l1 to l1\n");
        assert!(matches!(shared, Err(ModelError::SharedAction(_))));
        let bad = parse_game("game g\nclock x\nloc l0 invariant \"x<=\" parity 0\n");
        assert!(matches!(bad, Err(ModelError::Syntax { line: 3, .. })));
        assert!(matches!(parse_game("game g\nloc l0 parity 99\n"), Err(ModelError::ParityOutOfRange(99))));
        assert!(matches!(parse_game("game g\nclock x\nloc l0 invariant \"x<=1\" parity 0\nstate s l0 x=2\n"), Err(ModelError::InvariantViolated(_))));
        assert!(matches!(parse_game("game g\nfrob\n"), Err(ModelError::Syntax { line: 2, column: 1, .. })));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/6"), Some(Q::new(1.into(), 2.into())));
        assert_eq!(parse_rational("7"), Some(Q::from_integer(7.into())));
        assert_eq!(parse_rational("-1"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}

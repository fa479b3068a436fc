//! Clock constraints.
//!
//! Constraints are stored in a small core grammar: `x <= k`, `x >= k`,
//! negation and conjunction, plus an internal difference atom `x - y <= k`
//! that only guard erosion produces. The surface operators `<`, `>`, `==`
//! and `||` are rewritten into the core on construction and recovered again
//! when printing, so that printing and re-parsing yields the same tree.

use std::fmt;

use num_rational::BigRational;

use super::{ModelError, Q};

/// A clock constraint over clock indices of the owning game.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockConstraint {
    True,
    /// `clock <= k`
    Le(usize, u64),
    /// `clock >= k`
    Ge(usize, u64),
    /// `x - y <= k`; never produced by the parser.
    DiffLe(usize, usize, i64),
    Not(Box<ClockConstraint>),
    And(Vec<ClockConstraint>),
}

impl ClockConstraint {
    pub fn lt(x: usize, k: u64) -> Self {
        Self::Not(Box::new(Self::Ge(x, k)))
    }

    pub fn gt(x: usize, k: u64) -> Self {
        Self::Not(Box::new(Self::Le(x, k)))
    }

    pub fn eq(x: usize, k: u64) -> Self {
        Self::And(vec![Self::Le(x, k), Self::Ge(x, k)])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: ClockConstraint) -> Self {
        Self::Not(Box::new(c))
    }

    pub fn falsity() -> Self {
        Self::not(Self::True)
    }

    /// Conjunction; a single operand is returned unchanged.
    pub fn and(mut items: Vec<ClockConstraint>) -> Self {
        match items.len() {
            0 => Self::True,
            1 => items.pop().unwrap(),
            _ => Self::And(items),
        }
    }

    /// Disjunction, encoded as `!(!a && !b && ...)`.
    pub fn or(items: Vec<ClockConstraint>) -> Self {
        match items.len() {
            0 => Self::falsity(),
            1 => items.into_iter().next().unwrap(),
            _ => Self::not(Self::And(items.into_iter().map(Self::not).collect())),
        }
    }

    /// Satisfaction at a valuation indexed by clock.
    pub fn eval(&self, v: &[Q]) -> Result<bool, ModelError> {
        if let Some(x) = self.clocks().into_iter().find(|&x| x >= v.len()) {
            return Err(ModelError::MissingClock(x));
        }
        Ok(self.holds(v))
    }

    /// Satisfaction without bounds checking of the valuation.
    pub fn holds(&self, v: &[Q]) -> bool {
        match self {
            Self::True => true,
            Self::Le(x, k) => v[*x] <= q_of(*k),
            Self::Ge(x, k) => v[*x] >= q_of(*k),
            Self::DiffLe(x, y, k) => &v[*x] - &v[*y] <= BigRational::from_integer((*k).into()),
            Self::Not(c) => !c.holds(v),
            Self::And(cs) => cs.iter().all(|c| c.holds(v)),
        }
    }

    /// Clock indices mentioned anywhere in the constraint, sorted and deduplicated.
    pub fn clocks(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| match a {
            Self::Le(x, _) | Self::Ge(x, _) => out.push(*x),
            Self::DiffLe(x, y, _) => {
                out.push(*x);
                out.push(*y);
            }
            _ => {}
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Calls `f` on every atom (including `True`).
    pub fn visit_atoms<F: FnMut(&ClockConstraint)>(&self, f: &mut F) {
        match self {
            Self::Not(c) => c.visit_atoms(f),
            Self::And(cs) => cs.iter().for_each(|c| c.visit_atoms(f)),
            atom => f(atom),
        }
    }

    /// Largest constant compared with clock `x` (differences count for both sides).
    pub fn max_constant(&self, x: usize) -> Option<u64> {
        let mut best: Option<u64> = None;
        self.visit_atoms(&mut |a| {
            let k = match a {
                Self::Le(y, k) | Self::Ge(y, k) if *y == x => Some(*k),
                Self::DiffLe(y, z, k) if *y == x || *z == x => Some(k.unsigned_abs()),
                _ => None,
            };
            if let Some(k) = k {
                best = Some(best.map_or(k, |b| b.max(k)));
            }
        });
        best
    }

    pub fn has_difference(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| found |= matches!(a, Self::DiffLe(..)));
        found
    }

    /// Multiplies every constant by `k` (timescale change).
    pub fn scaled(&self, k: u64) -> Self {
        match self {
            Self::True => Self::True,
            Self::Le(x, c) => Self::Le(*x, c * k),
            Self::Ge(x, c) => Self::Ge(*x, c * k),
            Self::DiffLe(x, y, c) => Self::DiffLe(*x, *y, c * k as i64),
            Self::Not(c) => Self::not(c.scaled(k)),
            Self::And(cs) => Self::And(cs.iter().map(|c| c.scaled(k)).collect()),
        }
    }

    /// The constraint that holds before resetting `resets` to zero exactly
    /// when `self` holds afterwards.
    pub fn after_reset(&self, resets: &[usize]) -> Self {
        let r = |x: &usize| resets.contains(x);
        let truth = |b: bool| if b { Self::True } else { Self::falsity() };
        match self {
            Self::Le(x, _) if r(x) => Self::True,
            Self::Ge(x, k) if r(x) => truth(*k == 0),
            Self::DiffLe(x, y, k) => match (r(x), r(y)) {
                (true, true) => truth(*k >= 0),
                (true, false) if *k >= 0 => Self::True,
                (true, false) => Self::Ge(*y, k.unsigned_abs()),
                (false, true) if *k < 0 => Self::falsity(),
                (false, true) => Self::Le(*x, *k as u64),
                (false, false) => self.clone(),
            },
            Self::Not(c) => Self::not(c.after_reset(resets)),
            Self::And(cs) => Self::And(cs.iter().map(|c| c.after_reset(resets)).collect()),
            atom => atom.clone(),
        }
    }

    /// Renames clock indices through `map`.
    pub fn remapped(&self, map: &dyn Fn(usize) -> usize) -> Self {
        match self {
            Self::True => Self::True,
            Self::Le(x, c) => Self::Le(map(*x), *c),
            Self::Ge(x, c) => Self::Ge(map(*x), *c),
            Self::DiffLe(x, y, c) => Self::DiffLe(map(*x), map(*y), *c),
            Self::Not(c) => Self::not(c.remapped(map)),
            Self::And(cs) => Self::And(cs.iter().map(|c| c.remapped(map)).collect()),
        }
    }

    /// Printable form using the given clock names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Printer { c: self, names }
    }

    /// Inner operands when this node prints as a disjunction.
    fn as_or(&self) -> Option<Vec<&ClockConstraint>> {
        if let Self::Not(inner) = self {
            if let Self::And(items) = inner.as_ref() {
                if items.len() >= 2 {
                    let mut out = Vec::with_capacity(items.len());
                    for it in items {
                        match it {
                            Self::Not(x) => out.push(x.as_ref()),
                            _ => return None,
                        }
                    }
                    return Some(out);
                }
            }
        }
        None
    }

    /// `x==k` pattern produced by the parser.
    fn as_eq(&self) -> Option<(usize, u64)> {
        if let Self::And(items) = self {
            if let [Self::Le(x, a), Self::Ge(y, b)] = items.as_slice() {
                if x == y && a == b {
                    return Some((*x, *a));
                }
            }
        }
        None
    }
}

fn q_of(k: u64) -> Q {
    BigRational::from_integer(k.into())
}

/// Precedence levels for printing: 0 = or, 1 = and, 2 = unary/atom.
fn level(c: &ClockConstraint) -> u8 {
    if c.as_or().is_some() {
        0
    } else if c.as_eq().is_some() {
        2
    } else if matches!(c, ClockConstraint::And(_)) {
        1
    } else {
        2
    }
}

struct Printer<'a> {
    c: &'a ClockConstraint,
    names: &'a [String],
}

impl Printer<'_> {
    fn name(&self, x: usize) -> &str {
        self.names.get(x).map(String::as_str).unwrap_or("?")
    }

    fn child(&self, f: &mut fmt::Formatter<'_>, c: &ClockConstraint, min_level: u8) -> fmt::Result {
        let p = Printer { c, names: self.names };
        if level(c) < min_level {
            write!(f, "({p})")
        } else {
            write!(f, "{p}")
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ClockConstraint as C;
        if let Some(items) = self.c.as_or() {
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(" || ")?;
                }
                self.child(f, it, 1)?;
            }
            return Ok(());
        }
        if let Some((x, k)) = self.c.as_eq() {
            return write!(f, "{}=={}", self.name(x), k);
        }
        match self.c {
            C::True => f.write_str("true"),
            C::Le(x, k) => write!(f, "{}<={}", self.name(*x), k),
            C::Ge(x, k) => write!(f, "{}>={}", self.name(*x), k),
            C::DiffLe(x, y, k) => write!(f, "{}-{}<={}", self.name(*x), self.name(*y), k),
            C::Not(inner) => match inner.as_ref() {
                C::Ge(x, k) => write!(f, "{}<{}", self.name(*x), k),
                C::Le(x, k) => write!(f, "{}>{}", self.name(*x), k),
                C::DiffLe(x, y, k) => write!(f, "{}-{}>{}", self.name(*x), self.name(*y), k),
                other => {
                    f.write_str("!")?;
                    self.child(f, other, 2)
                }
            },
            C::And(items) => {
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" && ")?;
                    }
                    self.child(f, it, 2)?;
                }
                Ok(())
            }
        }
    }
}

/// Parses a constraint expression; `clock` resolves names to indices.
pub fn parse_constraint(
    text: &str,
    clock: &dyn Fn(&str) -> Option<usize>,
) -> Result<ClockConstraint, ConstraintSyntaxError> {
    let mut p = ExprParser { src: text.as_bytes(), pos: 0, clock };
    let c = p.or_expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(c)
}

/// Error inside a constraint expression; `offset` is a byte offset into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSyntaxError {
    pub offset: usize,
    pub message: String,
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    clock: &'a dyn Fn(&str) -> Option<usize>,
}

impl ExprParser<'_> {
    fn err(&self, msg: impl Into<String>) -> ConstraintSyntaxError {
        ConstraintSyntaxError { offset: self.pos, message: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn or_expr(&mut self) -> Result<ClockConstraint, ConstraintSyntaxError> {
        let mut items = vec![self.and_expr()?];
        while self.eat("||") {
            items.push(self.and_expr()?);
        }
        Ok(ClockConstraint::or(items))
    }

    fn and_expr(&mut self) -> Result<ClockConstraint, ConstraintSyntaxError> {
        let mut items = vec![self.unary()?];
        while self.eat("&&") {
            items.push(self.unary()?);
        }
        Ok(ClockConstraint::and(items))
    }

    fn unary(&mut self) -> Result<ClockConstraint, ConstraintSyntaxError> {
        if self.eat("!") {
            return Ok(ClockConstraint::not(self.unary()?));
        }
        if self.eat("(") {
            let c = self.or_expr()?;
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(c);
        }
        self.atom()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            let ok = b.is_ascii_alphanumeric() || b == b'_' || (self.pos > start && b == b'.');
            if !ok || (self.pos == start && b.is_ascii_digit()) {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<ClockConstraint, ConstraintSyntaxError> {
        let start = self.pos;
        let name = self.ident().ok_or_else(|| self.err("expected clock name, 'true', '!' or '('"))?;
        if name == "true" {
            return Ok(ClockConstraint::True);
        }
        if name == "false" {
            return Ok(ClockConstraint::falsity());
        }
        let x = (self.clock)(&name).ok_or(ConstraintSyntaxError {
            offset: start,
            message: format!("undeclared clock '{name}'"),
        })?;
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'-') {
            return Err(self.err("difference constraints are not supported"));
        }
        let op = ["<=", ">=", "==", "<", ">"]
            .into_iter()
            .find(|op| self.eat(op))
            .ok_or_else(|| self.err("expected comparison operator"))?;
        let k = self.number()?;
        Ok(match op {
            "<=" => ClockConstraint::Le(x, k),
            ">=" => ClockConstraint::Ge(x, k),
            "==" => ClockConstraint::eq(x, k),
            "<" => ClockConstraint::lt(x, k),
            _ => ClockConstraint::gt(x, k),
        })
    }

    fn number(&mut self) -> Result<u64, ConstraintSyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a nonnegative integer constant"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(ConstraintSyntaxError { offset: start, message: "constant out of range".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    fn parse(s: &str) -> ClockConstraint {
        parse_constraint(s, &|n| names().iter().position(|m| m == n)).unwrap()
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn boundary_inclusion() {
        let c = parse("x<=1");
        assert!(c.eval(&[q(1, 1), q(0, 1)]).unwrap());
        assert!(!parse("!(x<=1)").eval(&[q(1, 1), q(0, 1)]).unwrap());
        assert!(parse("x<=1 && y>1").eval(&[q(1, 2), q(3, 2)]).unwrap());
    }

    #[test]
    fn missing_clock_is_reported() {
        assert_eq!(parse("y>=1").eval(&[q(0, 1)]), Err(ModelError::MissingClock(1)));
    }

    #[test]
    fn surface_sugar_normalizes_to_core() {
        assert_eq!(parse("x<2"), ClockConstraint::not(ClockConstraint::Ge(0, 2)));
        assert_eq!(parse("x==3"), ClockConstraint::And(vec![ClockConstraint::Le(0, 3), ClockConstraint::Ge(0, 3)]));
        assert!(matches!(parse("x<1 || y>2"), ClockConstraint::Not(_)));
    }

    #[test]
    fn print_then_parse_is_identity() {
        for s in [
            "true",
            "x<=1",
            "x<1 || y>2",
            "(x<1 || y>2) && x==1",
            "!(x<=1 && y>=2)",
            "x<1 || (y>2 || x>=3)",
            "!!x<=1",
            "x<=1 && (y<=2 && y>=1)",
            "false",
        ] {
            let c = parse(s);
            let printed = c.display(&names()).to_string();
            assert_eq!(parse(&printed), c, "{s} printed as {printed}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = |n: &str| names().iter().position(|m| m == n);
        assert!(parse_constraint("z<=1", &f).is_err());
        assert!(parse_constraint("x-y<=1", &f).is_err());
        assert!(parse_constraint("x<=", &f).is_err());
        assert!(parse_constraint("(x<=1", &f).is_err());
        assert!(parse_constraint("x<=1 y", &f).is_err());
    }
}

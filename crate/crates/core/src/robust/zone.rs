//! Difference-bound matrices over exact rationals.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;

use crate::model::{ClockConstraint, Q};

/// Upper bound on a difference `x_i - x_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Le(Q),
    Lt(Q),
    Inf,
}

impl Bound {
    fn zero() -> Bound {
        Bound::Le(Q::zero())
    }

    pub fn add(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Inf, _) | (_, Bound::Inf) => Bound::Inf,
            (Bound::Le(a), Bound::Le(b)) => Bound::Le(a + b),
            (Bound::Le(a), Bound::Lt(b)) | (Bound::Lt(a), Bound::Le(b)) | (Bound::Lt(a), Bound::Lt(b)) => Bound::Lt(a + b),
        }
    }

    /// The strict opposite: `x ≤ c` becomes `-x < -c`.
    fn negated(&self) -> Option<Bound> {
        match self {
            Bound::Le(c) => Some(Bound::Lt(-c)),
            Bound::Lt(c) => Some(Bound::Le(-c)),
            Bound::Inf => None,
        }
    }

    fn value(&self) -> Option<&Q> {
        match self {
            Bound::Le(c) | Bound::Lt(c) => Some(c),
            Bound::Inf => None,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Tighter bounds compare smaller.
impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Inf, Bound::Inf) => Ordering::Equal,
            (Bound::Inf, _) => Ordering::Greater,
            (_, Bound::Inf) => Ordering::Less,
            (a, b) => {
                let (va, vb) = (a.value().unwrap(), b.value().unwrap());
                va.cmp(vb).then_with(|| match (a, b) {
                    (Bound::Lt(_), Bound::Le(_)) => Ordering::Less,
                    (Bound::Le(_), Bound::Lt(_)) => Ordering::Greater,
                    _ => Ordering::Equal,
                })
            }
        }
    }
}

/// A convex set of valuations `{v ≥ 0 | v_i - v_j ⊲ m[i][j]}`, with index 0
/// standing for the constant zero. Kept in canonical (shortest-path) form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zone {
    dim: usize,
    m: Vec<Bound>,
}

impl Zone {
    /// All nonnegative valuations of `clocks` clocks.
    pub fn universe(clocks: usize) -> Zone {
        let dim = clocks + 1;
        let mut m = vec![Bound::Inf; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::zero();
            m[i] = Bound::zero();
        }
        Zone { dim, m }
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn get(&self, i: usize, j: usize) -> &Bound {
        &self.m[i * self.dim + j]
    }

    /// Intersects with `x_i - x_j ⊲ b`, then re-canonicalizes.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) {
        let d = self.dim;
        if b < self.m[i * d + j] {
            self.m[i * d + j] = b;
            self.canonicalize();
        }
    }

    pub fn canonicalize(&mut self) {
        let d = self.dim;
        for k in 0..d {
            for i in 0..d {
                if self.m[i * d + k] == Bound::Inf {
                    continue;
                }
                for j in 0..d {
                    let via = self.m[i * d + k].add(&self.m[k * d + j]);
                    if via < self.m[i * d + j] {
                        self.m[i * d + j] = via;
                    }
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim).any(|i| self.m[i * self.dim + i] < Bound::zero())
    }

    pub fn intersect(&self, other: &Zone) -> Zone {
        let mut z = self.clone();
        for (a, b) in z.m.iter_mut().zip(&other.m) {
            if b < a {
                *a = b.clone();
            }
        }
        z.canonicalize();
        z
    }

    pub fn includes(&self, other: &Zone) -> bool {
        other.is_empty() || (!self.is_empty() && other.m.iter().zip(&self.m).all(|(o, s)| o <= s))
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        let val = |i: usize| if i == 0 { Q::zero() } else { v[i - 1].clone() };
        for i in 0..self.dim {
            for j in 0..self.dim {
                let diff = val(i) - val(j);
                let ok = match self.get(i, j) {
                    Bound::Inf => true,
                    Bound::Le(c) => &diff <= c,
                    Bound::Lt(c) => &diff < c,
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Valuations that reach the zone within at most `eps` time units.
    pub fn dilate(&self, eps: &Q) -> Zone {
        let mut z = self.clone();
        for i in 1..self.dim {
            z.m[i] = z.m[i].add(&Bound::Le(eps.clone()));
            if z.m[i] > Bound::zero() {
                z.m[i] = Bound::zero();
            }
        }
        z.canonicalize();
        z
    }

    /// Complement within the nonnegative orthant, as a union of zones.
    pub fn complement(&self) -> Vec<Zone> {
        let u = Zone::universe(self.clocks());
        if self.is_empty() {
            return vec![u];
        }
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                if let Some(neg) = self.get(i, j).negated() {
                    let mut z = u.clone();
                    z.constrain(j, i, neg);
                    if !z.is_empty() {
                        out.push(z);
                    }
                }
            }
        }
        simplify(out)
    }

    /// The zone as a conjunction of atoms, omitting bounds implied by others.
    /// Fails if a constant is not an integer.
    pub fn to_constraint(&self) -> Result<ClockConstraint, Q> {
        if self.is_empty() {
            return Ok(ClockConstraint::falsity());
        }
        let int = |q: &Q| -> Result<i64, Q> {
            if q.is_integer() {
                i64::try_from(q.to_integer()).map_err(|_| q.clone())
            } else {
                Err(q.clone())
            }
        };
        let mut atoms = Vec::new();
        for i in 1..self.dim {
            let x = i - 1;
            match self.get(i, 0) {
                Bound::Le(c) => atoms.push(ClockConstraint::Le(x, int(c)? as u64)),
                Bound::Lt(c) => atoms.push(ClockConstraint::lt(x, int(c)? as u64)),
                Bound::Inf => {}
            }
            match self.get(0, i) {
                Bound::Le(c) if !c.is_zero() => atoms.push(ClockConstraint::Ge(x, (-int(c)?) as u64)),
                Bound::Lt(c) => atoms.push(ClockConstraint::gt(x, (-int(c)?) as u64)),
                _ => {}
            }
        }
        for i in 1..self.dim {
            for j in 1..self.dim {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if *b == Bound::Inf || self.get(i, 0).add(self.get(0, j)) <= *b {
                    continue;
                }
                match b {
                    Bound::Le(c) => atoms.push(ClockConstraint::DiffLe(i - 1, j - 1, int(c)?)),
                    Bound::Lt(c) => atoms.push(ClockConstraint::not(ClockConstraint::DiffLe(j - 1, i - 1, -int(c)?))),
                    Bound::Inf => unreachable!(),
                }
            }
        }
        Ok(ClockConstraint::and(atoms))
    }
}

/// Drops empty zones and zones included in another member.
pub fn simplify(zones: Vec<Zone>) -> Vec<Zone> {
    let zones: Vec<Zone> = zones.into_iter().filter(|z| !z.is_empty()).collect();
    let mut keep: Vec<Zone> = Vec::new();
    for (i, z) in zones.iter().enumerate() {
        let dominated = zones.iter().enumerate().any(|(k, o)| k != i && o.includes(z) && (!z.includes(o) || k < i));
        if !dominated {
            keep.push(z.clone());
        }
    }
    keep
}

/// Complement of a union: the intersection of the members' complements.
pub fn complement_union(zones: &[Zone], clocks: usize) -> Vec<Zone> {
    let mut acc = vec![Zone::universe(clocks)];
    for z in zones {
        let comp = z.complement();
        let mut next = Vec::new();
        for a in &acc {
            for c in &comp {
                let i = a.intersect(c);
                if !i.is_empty() {
                    next.push(i);
                }
            }
        }
        acc = simplify(next);
    }
    acc
}

/// Union of zones denoting the same valuations as `c`.
pub fn zones_of(c: &ClockConstraint, clocks: usize) -> Vec<Zone> {
    let atom = |i: usize, j: usize, b: Bound| {
        let mut z = Zone::universe(clocks);
        z.constrain(i, j, b);
        simplify(vec![z])
    };
    let k = |n: u64| Q::from_integer(n.into());
    match c {
        ClockConstraint::True => vec![Zone::universe(clocks)],
        ClockConstraint::Le(x, n) => atom(x + 1, 0, Bound::Le(k(*n))),
        ClockConstraint::Ge(x, n) => atom(0, x + 1, Bound::Le(-k(*n))),
        ClockConstraint::DiffLe(x, y, n) => atom(x + 1, y + 1, Bound::Le(Q::from_integer((*n).into()))),
        ClockConstraint::Not(inner) => complement_union(&zones_of(inner, clocks), clocks),
        ClockConstraint::And(parts) => {
            let mut acc = vec![Zone::universe(clocks)];
            for p in parts {
                let zs = zones_of(p, clocks);
                let mut next = Vec::new();
                for a in &acc {
                    for z in &zs {
                        let i = a.intersect(z);
                        if !i.is_empty() {
                            next.push(i);
                        }
                    }
                }
                acc = simplify(next);
            }
            acc
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if *b == Bound::Inf || (i == 0 && *b == Bound::zero()) {
                    continue;
                }
                if !first {
                    f.write_str(" && ")?;
                }
                first = false;
                let name = |k: usize| if k == 0 { "0".to_string() } else { format!("x{}", k - 1) };
                match b {
                    Bound::Le(c) => write!(f, "{}-{}<={}", name(i), name(j), c)?,
                    Bound::Lt(c) => write!(f, "{}-{}<{}", name(i), name(j), c)?,
                    Bound::Inf => {}
                }
            }
        }
        if first {
            f.write_str("true")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn bound_order() {
        assert!(Bound::Lt(q(1, 1)) < Bound::Le(q(1, 1)));
        assert!(Bound::Le(q(1, 1)) < Bound::Lt(q(2, 1)));
        assert!(Bound::Le(q(5, 1)) < Bound::Inf);
    }

    #[test]
    fn empty_and_contains() {
        let mut z = Zone::universe(1);
        z.constrain(1, 0, Bound::Le(q(1, 1)));
        assert!(z.contains(&[q(1, 1)]));
        assert!(!z.contains(&[q(3, 2)]));
        z.constrain(0, 1, Bound::Lt(q(-1, 1)));
        assert!(z.is_empty());
    }

    #[test]
    fn complement_of_interval() {
        let zs = zones_of(&ClockConstraint::and(vec![ClockConstraint::Ge(0, 1), ClockConstraint::Le(0, 2)]), 1);
        let comp = complement_union(&zs, 1);
        assert_eq!(comp.len(), 2);
        for (x, inside) in [(q(1, 2), false), (q(1, 1), true), (q(2, 1), true), (q(5, 2), false)] {
            assert_eq!(comp.iter().any(|z| z.contains(std::slice::from_ref(&x))), !inside);
        }
    }

    #[test]
    fn dilation_relaxes_lower_bounds() {
        let zs = zones_of(&ClockConstraint::gt(0, 1), 1);
        let d = zs[0].dilate(&q(1, 2));
        assert!(d.contains(&[q(3, 5)]));
        assert!(!d.contains(&[q(1, 2)]));
    }

    #[test]
    fn constraint_round_trip() {
        let c = ClockConstraint::and(vec![ClockConstraint::lt(0, 2), ClockConstraint::Ge(1, 1), ClockConstraint::DiffLe(0, 1, 0)]);
        let zs = zones_of(&c, 2);
        assert_eq!(zs.len(), 1);
        let back = zs[0].to_constraint().unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let v = [q(a, 2), q(b, 2)];
                assert_eq!(back.holds(&v), c.holds(&v), "{v:?}");
            }
        }
    }
}

//! Clock regions.
//!
//! A region stores, per clock, its integer part `h` and a class index:
//! class `0` means the fractional part is zero, classes `1..=n` order the
//! nonzero fractional parts increasingly, and [`ABOVE`] marks a clock whose
//! value exceeds its ceiling (its `h` is then pinned to the ceiling). Classes
//! are always numbered contiguously, so structural equality is region
//! equality.
//!
//! The low-level functions take the ceiling vector directly so that the
//! enlarged construction can add its own global clock.

use std::fmt;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::model::{ClockConstraint, ConcreteState, TimedGame, Q};

/// Class marker for clocks above their ceiling.
pub const ABOVE: u8 = u8::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub loc: u32,
    pub h: Vec<u32>,
    pub cls: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("constant {constant} compared with clock #{clock} exceeds its ceiling {ceiling}")]
    ConstantAboveCeiling { clock: usize, constant: u64, ceiling: u64 },
    #[error("constraint is not constant on the region (difference constraint over clocks above their ceilings)")]
    Undecidable,
}

impl Region {
    /// Number of nonzero fractional classes.
    pub fn classes(&self) -> u8 {
        self.cls.iter().copied().filter(|&c| c != ABOVE).max().unwrap_or(0)
    }

    pub fn is_above(&self, x: usize) -> bool {
        self.cls[x] == ABOVE
    }

    /// No clock (below its ceiling) has an integral value.
    pub fn is_open(&self) -> bool {
        !self.cls.contains(&0)
    }

    /// Every clock is above its ceiling, so time elapse cannot leave the region.
    pub fn is_unbounded(&self) -> bool {
        self.cls.iter().all(|&c| c == ABOVE)
    }

    pub fn with_location(&self, loc: usize) -> Region {
        Region { loc: loc as u32, ..self.clone() }
    }

    /// Removes the trailing clock (used to drop auxiliary clocks).
    pub fn without_last_clock(&self) -> Region {
        let mut r = self.clone();
        r.h.pop();
        r.cls.pop();
        renumber(&mut r.cls);
        r
    }
}

/// Renumbers the nonzero fractional classes to `1..=n` preserving order.
fn renumber(cls: &mut [u8]) {
    let mut used: Vec<u8> = cls.iter().copied().filter(|&c| c != 0 && c != ABOVE).collect();
    used.sort_unstable();
    used.dedup();
    for c in cls.iter_mut() {
        if *c != 0 && *c != ABOVE {
            *c = used.binary_search(c).unwrap() as u8 + 1;
        }
    }
}

/// Region containing the valuation `v` at location `loc`.
pub fn region_of_valuation(ceil: &[u64], loc: usize, v: &[Q]) -> Region {
    let n = v.len();
    let mut h = vec![0u32; n];
    let mut cls = vec![0u8; n];
    let mut fracs: Vec<Q> = Vec::new();
    for x in 0..n {
        let c = Q::from_integer(ceil[x].into());
        if v[x] > c {
            h[x] = ceil[x] as u32;
            cls[x] = ABOVE;
        } else {
            let fl = v[x].floor();
            h[x] = fl.to_integer().to_u32().expect("clock value fits");
            let f = &v[x] - fl;
            if !f.is_zero() {
                fracs.push(f);
            }
        }
    }
    fracs.sort();
    fracs.dedup();
    for x in 0..n {
        if cls[x] != ABOVE {
            let f = &v[x] - v[x].floor();
            if !f.is_zero() {
                cls[x] = fracs.binary_search(&f).unwrap() as u8 + 1;
            }
        }
    }
    Region { loc: loc as u32, h, cls }
}

/// The next region entered by letting time elapse, or `None` when every
/// clock is above its ceiling.
pub fn next_region(ceil: &[u64], r: &Region) -> Option<Region> {
    let mut s = r.clone();
    if s.cls.contains(&0) {
        let mut created = false;
        for x in 0..s.cls.len() {
            match s.cls[x] {
                0 if (s.h[x] as u64) < ceil[x] => {
                    s.cls[x] = 1;
                    created = true;
                }
                0 => s.cls[x] = ABOVE,
                ABOVE => {}
                _ => s.cls[x] += 1,
            }
        }
        if !created {
            renumber(&mut s.cls);
        }
        Some(s)
    } else {
        let n = s.classes();
        if n == 0 {
            return None;
        }
        for x in 0..s.cls.len() {
            if s.cls[x] == n {
                s.h[x] += 1;
                s.cls[x] = 0;
                debug_assert!(s.h[x] as u64 <= ceil[x]);
            }
        }
        Some(s)
    }
}

/// Region after resetting the given clocks to zero.
pub fn reset(r: &Region, clocks: &[usize]) -> Region {
    let mut s = r.clone();
    for &x in clocks {
        s.h[x] = 0;
        s.cls[x] = 0;
    }
    renumber(&mut s.cls);
    s
}

/// Representative valuation with fractional parts `k/(n+2)` by class index;
/// `variant` spreads clocks above their ceilings differently.
pub fn representative_variant(ceil: &[u64], r: &Region, variant: usize) -> Vec<Q> {
    let n = r.classes() as i64;
    let k = r.cls.len();
    (0..k)
        .map(|x| match r.cls[x] {
            ABOVE => {
                let base = Q::from_integer((ceil[x] + 1).into());
                let spread: i64 = match variant {
                    0 => 0,
                    1 => 1000 * (x as i64 + 1),
                    2 => 1000 * (k - x) as i64,
                    _ => 3 * x as i64 + 1,
                };
                let frac = if variant >= 3 { Q::new(1.into(), (x as i64 + 2).into()) } else { Q::zero() };
                base + Q::from_integer(spread.into()) + frac
            }
            c => Q::from_integer(r.h[x].into()) + Q::new((c as i64).into(), (n + 2).into()),
        })
        .collect()
}

pub fn representative(ceil: &[u64], r: &Region) -> Vec<Q> {
    representative_variant(ceil, r, 0)
}

/// Whether every valuation of the region satisfies `c`.
pub fn satisfies(ceil: &[u64], r: &Region, c: &ClockConstraint) -> Result<bool, RegionError> {
    match eval_symbolic(ceil, r, c)? {
        Some(b) => Ok(b),
        None => {
            let first = c.holds(&representative_variant(ceil, r, 0));
            for variant in 1..5 {
                if c.holds(&representative_variant(ceil, r, variant)) != first {
                    return Err(RegionError::Undecidable);
                }
            }
            Ok(first)
        }
    }
}

/// Symbolic evaluation; `None` when a difference atom involves a clock above its ceiling.
fn eval_symbolic(ceil: &[u64], r: &Region, c: &ClockConstraint) -> Result<Option<bool>, RegionError> {
    use ClockConstraint as C;
    let check = |x: usize, k: u64| {
        if k > ceil[x] {
            Err(RegionError::ConstantAboveCeiling { clock: x, constant: k, ceiling: ceil[x] })
        } else {
            Ok(())
        }
    };
    Ok(match c {
        C::True => Some(true),
        C::Le(x, k) => {
            check(*x, *k)?;
            let h = r.h[*x] as u64;
            Some(match r.cls[*x] {
                ABOVE => false,
                0 => h <= *k,
                _ => h < *k,
            })
        }
        C::Ge(x, k) => {
            check(*x, *k)?;
            Some(r.cls[*x] == ABOVE || r.h[*x] as u64 >= *k)
        }
        C::DiffLe(x, y, k) => {
            if r.cls[*x] == ABOVE || r.cls[*y] == ABOVE {
                None
            } else {
                let d = r.h[*x] as i64 - r.h[*y] as i64;
                Some(match r.cls[*x].cmp(&r.cls[*y]) {
                    std::cmp::Ordering::Equal | std::cmp::Ordering::Less => d <= *k,
                    std::cmp::Ordering::Greater => d < *k,
                })
            }
        }
        C::Not(inner) => eval_symbolic(ceil, r, inner)?.map(|b| !b),
        C::And(items) => {
            let mut all = Some(true);
            for it in items {
                match eval_symbolic(ceil, r, it)? {
                    Some(false) => return Ok(Some(false)),
                    Some(true) => {}
                    None => all = None,
                }
            }
            all
        }
    })
}

/// Regions visited by time elapse from `r`, at most `j` of them including `r`.
pub fn successors_upto(ceil: &[u64], r: &Region, j: usize) -> Vec<Region> {
    let mut out = vec![r.clone()];
    while out.len() < j {
        match next_region(ceil, out.last().unwrap()) {
            Some(n) => out.push(n),
            None => break,
        }
    }
    out
}

/// All surjective assignments of `k` items to classes `1..=m` for some `m`.
fn weak_orderings(k: usize) -> Vec<Vec<u8>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut cur = vec![1u8; k];
    loop {
        let mut used: Vec<u8> = cur.clone();
        used.sort_unstable();
        used.dedup();
        if used.len() == *used.last().unwrap() as usize {
            out.push(cur.clone());
        }
        let mut i = 0;
        while i < k && cur[i] as usize == k {
            cur[i] = 1;
            i += 1;
        }
        if i == k {
            break;
        }
        cur[i] += 1;
    }
    out
}

/// Calls `f` on every syntactically valid region of location `loc` (before
/// the invariant filter).
fn for_each_raw(ceil: &[u64], loc: usize, f: &mut dyn FnMut(Region)) {
    let n = ceil.len();
    // kind per clock: 0 = above, 1 = integral, 2 = fractional
    let mut kinds = vec![0u8; n];
    let mut hs = vec![0u32; n];
    fn rec(ceil: &[u64], loc: usize, x: usize, kinds: &mut Vec<u8>, hs: &mut Vec<u32>, orders: &[Vec<Vec<u8>>], f: &mut dyn FnMut(Region)) {
        let n = ceil.len();
        if x == n {
            let fr: Vec<usize> = (0..n).filter(|&y| kinds[y] == 2).collect();
            for ord in &orders[fr.len()] {
                let mut cls = vec![0u8; n];
                let mut h = hs.clone();
                for y in 0..n {
                    if kinds[y] == 0 {
                        cls[y] = ABOVE;
                        h[y] = ceil[y] as u32;
                    }
                }
                for (i, &y) in fr.iter().enumerate() {
                    cls[y] = ord[i];
                }
                f(Region { loc: loc as u32, h, cls });
            }
            return;
        }
        kinds[x] = 0;
        rec(ceil, loc, x + 1, kinds, hs, orders, f);
        for h in 0..=ceil[x] as u32 {
            hs[x] = h;
            kinds[x] = 1;
            rec(ceil, loc, x + 1, kinds, hs, orders, f);
            if (h as u64) < ceil[x] {
                kinds[x] = 2;
                rec(ceil, loc, x + 1, kinds, hs, orders, f);
            }
        }
        hs[x] = 0;
    }
    let orders: Vec<Vec<Vec<u8>>> = (0..=n).map(weak_orderings).collect();
    rec(ceil, loc, 0, &mut kinds, &mut hs, &orders, f);
}

/// Upper bound `|L|·∏(c_x+1)·|C|!·4^|C|` on the number of regions.
pub fn region_count_bound(g: &TimedGame) -> u128 {
    let n = g.clocks.len() as u128;
    let fact: u128 = (1..=n).product();
    let prod: u128 = g.clocks.iter().map(|c| c.ceiling as u128 + 1).product();
    g.locations.len() as u128 * prod * fact * 4u128.pow(n as u32)
}

/// Region-level API over a game's own clocks.
pub fn region_of(g: &TimedGame, s: &ConcreteState) -> Region {
    region_of_valuation(&g.ceilings(), s.location, &s.valuation)
}

/// Time successor at the game level; an unbounded region is its own successor.
pub fn time_successor(g: &TimedGame, r: &Region) -> (Region, bool) {
    match next_region(&g.ceilings(), r) {
        Some(n) => (n, false),
        None => (r.clone(), true),
    }
}

pub fn reset_region(_g: &TimedGame, r: &Region, clocks: &[usize]) -> Region {
    reset(r, clocks)
}

pub fn region_satisfies(g: &TimedGame, r: &Region, c: &ClockConstraint) -> Result<bool, RegionError> {
    satisfies(&g.ceilings(), r, c)
}

pub fn succr(g: &TimedGame, r: &Region, j: usize) -> Vec<Region> {
    successors_upto(&g.ceilings(), r, j)
}

/// Every region of the game whose location invariant holds on it.
pub fn enumerate_regions(g: &TimedGame) -> Result<Vec<Region>, RegionError> {
    let ceil = g.ceilings();
    let mut out = Vec::new();
    let mut err = None;
    for (l, loc) in g.locations.iter().enumerate() {
        for_each_raw(&ceil, l, &mut |r| {
            if err.is_some() {
                return;
            }
            match satisfies(&ceil, &r, &loc.invariant) {
                Ok(true) => out.push(r),
                Ok(false) => {}
                Err(e) => err = Some(e),
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Number of regions of the game, without materializing them.
pub fn count_regions(g: &TimedGame) -> Result<usize, RegionError> {
    let ceil = g.ceilings();
    let mut count = 0;
    let mut err = None;
    for (l, loc) in g.locations.iter().enumerate() {
        for_each_raw(&ceil, l, &mut |r| match satisfies(&ceil, &r, &loc.invariant) {
            Ok(true) => count += 1,
            Ok(false) => {}
            Err(e) => err = Some(e),
        });
    }
    err.map_or(Ok(count), Err)
}

/// Canonical display: `l0 | int x=0,y=1 | frac [ {x}=0 < {y} ] | above {}`.
pub struct RegionDisplay<'a> {
    pub region: &'a Region,
    pub clocks: &'a [String],
    pub locations: &'a [String],
}

impl fmt::Display for RegionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.region;
        let name = |x: usize| self.clocks.get(x).map(String::as_str).unwrap_or("?");
        let set = |xs: Vec<usize>| xs.into_iter().map(name).collect::<Vec<_>>().join(",");
        write!(f, "{} | int ", self.locations.get(r.loc as usize).map(String::as_str).unwrap_or("?"))?;
        let ints: Vec<String> = (0..r.h.len()).filter(|&x| !r.is_above(x)).map(|x| format!("{}={}", name(x), r.h[x])).collect();
        f.write_str(if ints.is_empty() { "-" } else { "" })?;
        f.write_str(&ints.join(","))?;
        f.write_str(" | frac [ ")?;
        let mut cells = Vec::new();
        let zero: Vec<usize> = (0..r.cls.len()).filter(|&x| r.cls[x] == 0).collect();
        if !zero.is_empty() {
            cells.push(format!("{{{}}}=0", set(zero)));
        }
        for c in 1..=r.classes() {
            cells.push(format!("{{{}}}", set((0..r.cls.len()).filter(|&x| r.cls[x] == c).collect())));
        }
        f.write_str(&cells.join(" < "))?;
        if !cells.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "] | above {{{}}}", set((0..r.cls.len()).filter(|&x| r.is_above(x)).collect()))
    }
}

/// Canonical string of a region of `g`.
pub fn region_string(g: &TimedGame, r: &Region) -> String {
    let clocks = g.clock_names();
    let locations: Vec<String> = g.locations.iter().map(|l| l.name.clone()).collect();
    RegionDisplay { region: r, clocks: &clocks, locations: &locations }.to_string()
}

/// Least common multiple of the denominators of some rationals.
pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a Q>) -> num_bigint::BigInt {
    qs.into_iter().fold(num_bigint::BigInt::from(1), |acc, q| acc.lcm(q.denom()))
}

//! Abstract values tracked along a path.

use std::collections::BTreeSet;
use std::fmt;

use crate::frontend::ast::{BinOp, IntTy, Tag};

/// Closed integer interval. `sign_ext` marks values produced by widening a
/// possibly negative signed integer; it survives copies and conversions
/// and is cleared by arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
    pub sign_ext: bool,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi, sign_ext: false }
    }

    pub fn konst(v: i64) -> Self {
        Interval::new(v, v)
    }

    pub fn full(t: IntTy) -> Self {
        Interval::new(t.min(), t.max())
    }

    pub fn admits_negative(&self) -> bool {
        self.lo < 0
    }

    pub fn fits(&self, t: IntTy) -> bool {
        t.min() <= self.lo && self.hi <= t.max()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn singleton(&self) -> Option<i64> {
        (self.lo == self.hi).then_some(self.lo)
    }

    /// Value after conversion from `from` to `to`: unchanged when every
    /// value fits, otherwise the full target range.
    pub fn convert(self, from: IntTy, to: IntTy) -> Interval {
        let sign_ext = self.sign_ext || (from.signed() && to.bits() > from.bits() && self.admits_negative());
        let mut out = if self.fits(to) {
            self
        } else if let Some(v) = self.singleton() {
            Interval::konst(to.wrap(v))
        } else {
            Interval::full(to)
        };
        out.sign_ext = sign_ext;
        out
    }

    /// Result of an arithmetic operator evaluated in type `t` with
    /// two's-complement wrap-around. Division and remainder by zero yield 0.
    pub fn arith(op: BinOp, a: Interval, b: Interval, t: IntTy) -> Interval {
        let raw = match op {
            BinOp::Add => Some((a.lo + b.lo, a.hi + b.hi)),
            BinOp::Sub => Some((a.lo - b.hi, a.hi - b.lo)),
            BinOp::Mul => {
                let c = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi];
                Some((*c.iter().min().unwrap(), *c.iter().max().unwrap()))
            }
            BinOp::Div => match b.singleton() {
                Some(0) => Some((0, 0)),
                Some(k) if k > 0 => Some((a.lo / k, a.hi / k)),
                _ => None,
            },
            BinOp::Rem => {
                if b.lo > 0 && a.lo >= 0 {
                    Some((0, a.hi.min(b.hi - 1)))
                } else if b.singleton() == Some(0) {
                    Some((0, 0))
                } else {
                    None
                }
            }
            _ => None,
        };
        match raw {
            Some((lo, hi)) if t.min() <= lo && hi <= t.max() => Interval::new(lo, hi),
            Some((lo, hi)) if lo == hi => Interval::konst(t.wrap(lo)),
            _ => Interval::full(t),
        }
    }

    /// Truth of `a op b`, when it is the same for every pair of values.
    pub fn compare(op: BinOp, a: Interval, b: Interval) -> Option<bool> {
        match op {
            BinOp::Lt => decide(a.hi < b.lo, a.lo >= b.hi),
            BinOp::Le => decide(a.hi <= b.lo, a.lo > b.hi),
            BinOp::Gt => Interval::compare(BinOp::Lt, b, a),
            BinOp::Ge => Interval::compare(BinOp::Le, b, a),
            BinOp::Eq => {
                let same = a.singleton().is_some() && a.singleton() == b.singleton();
                decide(same, a.hi < b.lo || b.hi < a.lo)
            }
            BinOp::Ne => Interval::compare(BinOp::Eq, a, b).map(|t| !t),
            _ => None,
        }
    }

    /// Narrow `self` to the values `v` for which `v op c` has truth `truth`.
    pub fn refine(self, op: BinOp, c: i64, truth: bool) -> Option<Interval> {
        let op = if truth { op } else { negate(op)? };
        let (lo, hi) = match op {
            BinOp::Lt => (self.lo, self.hi.min(c - 1)),
            BinOp::Le => (self.lo, self.hi.min(c)),
            BinOp::Gt => (self.lo.max(c + 1), self.hi),
            BinOp::Ge => (self.lo.max(c), self.hi),
            BinOp::Eq => (self.lo.max(c), self.hi.min(c)),
            BinOp::Ne => {
                if self.lo == c && self.hi == c {
                    return None;
                } else if self.lo == c {
                    (c + 1, self.hi)
                } else if self.hi == c {
                    (self.lo, c - 1)
                } else {
                    (self.lo, self.hi)
                }
            }
            _ => return Some(self),
        };
        (lo <= hi).then_some(Interval { lo, hi, sign_ext: self.sign_ext })
    }

    /// Narrow to nonzero (`truth`) or zero values.
    pub fn refine_truthy(self, truth: bool) -> Option<Interval> {
        self.refine(BinOp::Ne, 0, truth)
    }
}

fn decide(always: bool, never: bool) -> Option<bool> {
    if always {
        Some(true)
    } else if never {
        Some(false)
    } else {
        None
    }
}

/// Logical negation of a comparison operator.
pub fn negate(op: BinOp) -> Option<BinOp> {
    Some(match op {
        BinOp::Lt => BinOp::Ge,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Ge => BinOp::Lt,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        _ => return None,
    })
}

/// Mirror a comparison so that `c op v` becomes `v op' c`.
pub fn flip(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        other => other,
    }
}

/// Non-empty subset of the `var` tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagSet(u8);

impl TagSet {
    pub const ALL: TagSet = TagSet(0b111);

    fn bit(t: Tag) -> u8 {
        match t {
            Tag::Int => 1,
            Tag::Bool => 2,
            Tag::Ref => 4,
        }
    }

    pub fn only(t: Tag) -> TagSet {
        TagSet(Self::bit(t))
    }

    pub fn contains(self, t: Tag) -> bool {
        self.0 & Self::bit(t) != 0
    }

    pub fn is_only(self, t: Tag) -> bool {
        self == TagSet::only(t)
    }

    /// `None` when the result would be empty.
    pub fn intersect(self, other: TagSet) -> Option<TagSet> {
        let v = self.0 & other.0;
        (v != 0).then_some(TagSet(v))
    }

    pub fn without(self, t: Tag) -> Option<TagSet> {
        let v = self.0 & !Self::bit(t);
        (v != 0).then_some(TagSet(v))
    }

    pub fn tags(self) -> Vec<Tag> {
        Tag::ALL.into_iter().filter(|t| self.contains(*t)).collect()
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.tags().into_iter().map(Tag::name).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsVal {
    Int(Interval),
    Bool(Option<bool>),
    /// A `var` value. `tainted` when it may originate from `extern_input()`.
    Var { tags: TagSet, tainted: bool },
    Tag(TagSet),
    /// Possible dynamic classes of an object reference.
    Obj(BTreeSet<String>),
    Buf,
    Fn,
    Void,
}

impl AbsVal {
    pub fn interval(&self) -> Option<Interval> {
        match self {
            AbsVal::Int(i) => Some(*i),
            _ => None,
        }
    }
}

//! Security levels, gradual labels, and gradual security types.

use std::fmt;

/// A specific security level of the two-point lattice `low ⪯ high`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Low,
    High,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Low, Level::High];

    /// `self ⪯ other`
    pub fn leq(self, other: Level) -> bool {
        self <= other
    }

    pub fn join(self, other: Level) -> Level {
        self.max(other)
    }

    pub fn meet(self, other: Level) -> Level {
        self.min(other)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Low => "low",
            Level::High => "high",
        })
    }
}

/// A gradual label: a specific level or the unknown label `*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Known(Level),
    Star,
}

impl Label {
    pub const LOW: Label = Label::Known(Level::Low);
    pub const HIGH: Label = Label::Known(Level::High);
    pub const ALL: [Label; 3] = [Label::LOW, Label::HIGH, Label::Star];

    pub fn level(self) -> Option<Level> {
        match self {
            Label::Known(l) => Some(l),
            Label::Star => None,
        }
    }

    pub fn is_star(self) -> bool {
        self == Label::Star
    }

    /// Precision `self ⊑ other`: `*` is below everything.
    pub fn precise_leq(self, other: Label) -> bool {
        self == Label::Star || self == other
    }

    /// Consistent subtyping on labels.
    pub fn consistent_leq(self, other: Label) -> bool {
        match (self, other) {
            (Label::Known(a), Label::Known(b)) => a.leq(b),
            _ => true,
        }
    }

    /// Consistent join: the lattice join, or `*` if either side is unknown.
    pub fn consistent_join(self, other: Label) -> Label {
        match (self, other) {
            (Label::Known(a), Label::Known(b)) => Label::Known(a.join(b)),
            _ => Label::Star,
        }
    }

    pub fn consistent_meet(self, other: Label) -> Label {
        match (self, other) {
            (Label::Known(a), Label::Known(b)) => Label::Known(a.meet(b)),
            _ => Label::Star,
        }
    }

    /// Precision join (least upper bound w.r.t. `⊑`), defined only on consistent labels.
    pub fn precision_join(self, other: Label) -> Option<Label> {
        match (self, other) {
            (Label::Star, g) | (g, Label::Star) => Some(g),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

impl From<Level> for Label {
    fn from(l: Level) -> Self {
        Label::Known(l)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Known(l) => l.fmt(f),
            Label::Star => f.write_str("*"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Unit,
    Bool,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Unit => "Unit",
            Base::Bool => "Bool",
        })
    }
}

/// Raw types `T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RawType {
    Base(Base),
    Ref(Box<LType>),
    Fun(Box<LType>, Label, Box<LType>),
}

/// Labeled types `T_g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LType {
    pub raw: RawType,
    pub label: Label,
}

impl RawType {
    pub fn bool() -> RawType {
        RawType::Base(Base::Bool)
    }

    pub fn unit() -> RawType {
        RawType::Base(Base::Unit)
    }

    pub fn reference(inner: LType) -> RawType {
        RawType::Ref(Box::new(inner))
    }

    pub fn fun(dom: LType, pc: Label, cod: LType) -> RawType {
        RawType::Fun(Box::new(dom), pc, Box::new(cod))
    }

    pub fn at(self, label: impl Into<Label>) -> LType {
        LType { raw: self, label: label.into() }
    }

    pub fn precise_leq(&self, other: &RawType) -> bool {
        match (self, other) {
            (RawType::Base(a), RawType::Base(b)) => a == b,
            (RawType::Ref(a), RawType::Ref(b)) => a.precise_leq(b),
            (RawType::Fun(a, g, b), RawType::Fun(c, h, d)) => a.precise_leq(c) && g.precise_leq(*h) && b.precise_leq(d),
            _ => false,
        }
    }

    pub fn consistent_leq(&self, other: &RawType) -> bool {
        match (self, other) {
            (RawType::Base(a), RawType::Base(b)) => a == b,
            (RawType::Ref(a), RawType::Ref(b)) => a.consistent_leq(b) && b.consistent_leq(a),
            (RawType::Fun(a, g1, b), RawType::Fun(c, g2, d)) => {
                g2.consistent_leq(*g1) && c.consistent_leq(a) && b.consistent_leq(d)
            }
            _ => false,
        }
    }

    pub fn precision_join(&self, other: &RawType) -> Option<RawType> {
        Some(match (self, other) {
            (RawType::Base(a), RawType::Base(b)) if a == b => RawType::Base(*a),
            (RawType::Ref(a), RawType::Ref(b)) => RawType::reference(a.precision_join(b)?),
            (RawType::Fun(a, g1, b), RawType::Fun(c, g2, d)) => {
                RawType::fun(a.precision_join(c)?, g1.precision_join(*g2)?, b.precision_join(d)?)
            }
            _ => return None,
        })
    }

    pub fn consistent_join(&self, other: &RawType) -> Option<RawType> {
        Some(match (self, other) {
            (RawType::Base(a), RawType::Base(b)) if a == b => RawType::Base(*a),
            (RawType::Ref(a), RawType::Ref(b)) => RawType::reference(a.precision_join(b)?),
            (RawType::Fun(a, g1, b), RawType::Fun(c, g2, d)) => {
                RawType::fun(a.consistent_meet(c)?, g1.consistent_meet(*g2), b.consistent_join(d)?)
            }
            _ => return None,
        })
    }

    pub fn consistent_meet(&self, other: &RawType) -> Option<RawType> {
        Some(match (self, other) {
            (RawType::Base(a), RawType::Base(b)) if a == b => RawType::Base(*a),
            (RawType::Ref(a), RawType::Ref(b)) => RawType::reference(a.precision_join(b)?),
            (RawType::Fun(a, g1, b), RawType::Fun(c, g2, d)) => {
                RawType::fun(a.consistent_join(c)?, g1.consistent_join(*g2), b.consistent_meet(d)?)
            }
            _ => return None,
        })
    }

    /// Replaces every label occurring in the type with `*`.
    pub fn all_star(&self) -> RawType {
        match self {
            RawType::Base(b) => RawType::Base(*b),
            RawType::Ref(a) => RawType::reference(a.all_star()),
            RawType::Fun(a, _, b) => RawType::fun(a.all_star(), Label::Star, b.all_star()),
        }
    }
}

impl LType {
    pub fn bool(label: impl Into<Label>) -> LType {
        RawType::bool().at(label)
    }

    pub fn unit(label: impl Into<Label>) -> LType {
        RawType::unit().at(label)
    }

    /// `A ⊑ B`
    pub fn precise_leq(&self, other: &LType) -> bool {
        self.label.precise_leq(other.label) && self.raw.precise_leq(&other.raw)
    }

    /// `A ≲ B`
    pub fn consistent_leq(&self, other: &LType) -> bool {
        self.label.consistent_leq(other.label) && self.raw.consistent_leq(&other.raw)
    }

    pub fn precision_join(&self, other: &LType) -> Option<LType> {
        Some(LType { raw: self.raw.precision_join(&other.raw)?, label: self.label.precision_join(other.label)? })
    }

    pub fn consistent_join(&self, other: &LType) -> Option<LType> {
        Some(LType { raw: self.raw.consistent_join(&other.raw)?, label: self.label.consistent_join(other.label) })
    }

    pub fn consistent_meet(&self, other: &LType) -> Option<LType> {
        Some(LType { raw: self.raw.consistent_meet(&other.raw)?, label: self.label.consistent_meet(other.label) })
    }

    /// `stamp(T_g1, g2) = T_(g1 ∨̃ g2)`
    pub fn stamp(&self, g: impl Into<Label>) -> LType {
        LType { raw: self.raw.clone(), label: self.label.consistent_join(g.into()) }
    }

    pub fn with_label(&self, g: impl Into<Label>) -> LType {
        LType { raw: self.raw.clone(), label: g.into() }
    }

    pub fn all_star(&self) -> LType {
        LType { raw: self.raw.all_star(), label: Label::Star }
    }

    /// Every label position in the type, in pre-order (outer label last for each node).
    pub fn label_count(&self) -> usize {
        1 + match &self.raw {
            RawType::Base(_) => 0,
            RawType::Ref(a) => a.label_count(),
            RawType::Fun(a, _, b) => a.label_count() + 1 + b.label_count(),
        }
    }

    /// Replaces the `index`-th label position (same order as [`LType::label_count`]) by `g`.
    pub fn replace_label(&self, index: usize, g: Label) -> LType {
        let mut out = self.clone();
        let mut i = index;
        out.replace_label_in_place(&mut i, g);
        out
    }

    fn replace_label_in_place(&mut self, i: &mut usize, g: Label) -> bool {
        match &mut self.raw {
            RawType::Base(_) => {}
            RawType::Ref(a) => {
                if a.replace_label_in_place(i, g) {
                    return true;
                }
            }
            RawType::Fun(a, pc, b) => {
                if a.replace_label_in_place(i, g) {
                    return true;
                }
                if *i == 0 {
                    *pc = g;
                    return true;
                }
                *i -= 1;
                if b.replace_label_in_place(i, g) {
                    return true;
                }
            }
        }
        if *i == 0 {
            self.label = g;
            return true;
        }
        *i -= 1;
        false
    }
}

impl fmt::Display for RawType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawType::Base(b) => b.fmt(f),
            RawType::Ref(a) => write!(f, "Ref {a}"),
            RawType::Fun(a, g, b) => write!(f, "({a} -[{g}]-> {b})"),
        }
    }
}

impl fmt::Display for LType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.raw {
            RawType::Ref(_) => write!(f, "{} @ {}", self.raw, self.label),
            _ => write!(f, "{}@{}", self.raw, self.label),
        }
    }
}

//! Label expressions, used as the runtime program counter.

use std::fmt;

use crate::coercion::{BlameLabel, Head, Normalized, Seq};
use crate::lattice::{Label, Level};

/// A label expression `e ::= ℓ | e⟨c̄⟩ | blame p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelExpr {
    Lit(Level),
    Cast(Box<LabelExpr>, Seq),
    Blame(BlameLabel),
}

/// A label expression in normal form: `ℓ` or `ℓ⟨c̄⟩` with `c̄` irreducible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pc {
    pub base: Level,
    pub seq: Option<Seq>,
}

impl Pc {
    pub fn lit(l: Level) -> Pc {
        Pc { base: l, seq: None }
    }

    pub fn low() -> Pc {
        Pc::lit(Level::Low)
    }

    /// The label `g` with `⊢ PC ⇐ g`.
    pub fn label(&self) -> Label {
        self.seq.as_ref().map_or(self.base.into(), Seq::target)
    }

    /// `|PC|`
    pub fn security(&self) -> Level {
        self.seq.as_ref().map_or(self.base, Seq::security)
    }

    pub fn to_expr(&self) -> LabelExpr {
        match &self.seq {
            None => LabelExpr::Lit(self.base),
            Some(c) => LabelExpr::Cast(Box::new(LabelExpr::Lit(self.base)), c.clone()),
        }
    }

    pub fn well_formed(&self) -> bool {
        match &self.seq {
            None => true,
            Some(c) => c.well_typed() && c.is_irreducible() && c.source() == Label::Known(self.base),
        }
    }

    pub fn stamp(&self, l: Level) -> Pc {
        match (&self.seq, l) {
            (_, Level::Low) => self.clone(),
            (None, Level::High) => match self.base {
                Level::Low => Pc { base: Level::Low, seq: Some(Seq::id(Level::Low).stamp(Level::High)) },
                Level::High => self.clone(),
            },
            (Some(c), _) => Pc { base: self.base, seq: Some(c.stamp(l)) },
        }
    }

    pub fn stamp_bang(&self, l: Level) -> Pc {
        let c = self.seq.clone().unwrap_or_else(|| Seq::id(self.base));
        Pc { base: self.base, seq: Some(c.stamp_bang(l)) }
    }

    /// Casts the PC by `c̄` and normalizes.
    pub fn cast(&self, c: &Seq) -> Result<Pc, BlameLabel> {
        LabelExpr::Cast(Box::new(self.to_expr()), c.clone()).normalize()
    }
}

impl LabelExpr {
    /// One reduction step, if any applies.
    pub fn step(&self) -> Option<LabelExpr> {
        let LabelExpr::Cast(inner, c) = self else { return None };
        match inner.as_ref() {
            LabelExpr::Blame(p) => Some(LabelExpr::Blame(*p)),
            LabelExpr::Cast(e, c0) if matches!(e.as_ref(), LabelExpr::Lit(_)) && c0.is_irreducible() => {
                Some(LabelExpr::Cast(e.clone(), c0.compose(c)))
            }
            LabelExpr::Cast(..) => inner.step().map(|e| LabelExpr::Cast(Box::new(e), c.clone())),
            LabelExpr::Lit(l) => {
                if let Some((_, next)) = c.steps().into_iter().next() {
                    return Some(LabelExpr::Cast(inner.clone(), next));
                }
                match c.head {
                    Head::Fail { blame, .. } => Some(LabelExpr::Blame(blame)),
                    Head::Id(_) if c.tail.is_empty() => Some(LabelExpr::Lit(*l)),
                    Head::Id(_) => None,
                }
            }
        }
    }

    pub fn as_normal(&self) -> Option<Pc> {
        match self {
            LabelExpr::Lit(l) => Some(Pc::lit(*l)),
            LabelExpr::Cast(e, c) => match e.as_ref() {
                LabelExpr::Lit(l) if c.is_irreducible() => Some(Pc { base: *l, seq: Some(c.clone()) }),
                _ => None,
            },
            LabelExpr::Blame(_) => None,
        }
    }

    /// Reduces to a normal form or blame by iterating [`LabelExpr::step`].
    pub fn normalize_by_steps(&self) -> Result<Pc, BlameLabel> {
        let mut e = self.clone();
        loop {
            if let LabelExpr::Blame(p) = e {
                return Err(p);
            }
            if let Some(pc) = e.as_normal() {
                return Ok(pc);
            }
            e = e.step().expect("well-typed label expression makes progress");
        }
    }

    /// Reduces to a normal form or blame using the sequence normalizer directly.
    pub fn normalize(&self) -> Result<Pc, BlameLabel> {
        match self {
            LabelExpr::Lit(l) => Ok(Pc::lit(*l)),
            LabelExpr::Blame(p) => Err(*p),
            LabelExpr::Cast(e, c) => {
                let pc = e.normalize()?;
                let start = pc.seq.unwrap_or_else(|| Seq::id(pc.base));
                match start.compose(c).normalize() {
                    Normalized::Blame(p) => Err(p),
                    Normalized::Value(s) if s.tail.is_empty() => Ok(Pc::lit(pc.base)),
                    Normalized::Value(s) => Ok(Pc { base: pc.base, seq: Some(s) }),
                }
            }
        }
    }
}

impl fmt::Display for Pc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.seq {
            None => write!(f, "{}", self.base),
            Some(c) => write!(f, "{}<{}>", self.base, c),
        }
    }
}

impl fmt::Display for LabelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelExpr::Lit(l) => write!(f, "{l}"),
            LabelExpr::Cast(e, c) => write!(f, "{e}<{c}>"),
            LabelExpr::Blame(p) => write!(f, "blame {p}"),
        }
    }
}

//! Coercions on values: a raw-type coercion paired with a label coercion sequence.

use std::fmt;

use crate::cc::Value;
use crate::coercion::{coerce_label, BlameLabel, Normalized, Seq};
use crate::lattice::{Base, LType, Label, Level, RawType};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RawCoercion {
    /// `id(ι)`
    Base(Base),
    /// `Ref c d` with `c` the write coercion and `d` the read coercion.
    Ref(Box<VCoercion>, Box<VCoercion>),
    /// `d̄, c → d`: PC coercion, domain coercion, codomain coercion.
    Fun(Seq, Box<VCoercion>, Box<VCoercion>),
}

/// A value coercion `(c_r, c̄)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VCoercion {
    pub raw: RawCoercion,
    pub seq: Seq,
}

impl VCoercion {
    /// Source and target type, or `None` if the coercion is ill-typed.
    pub fn types(&self) -> Option<(LType, LType)> {
        if !self.seq.well_typed() {
            return None;
        }
        let (a, b) = match &self.raw {
            RawCoercion::Base(i) => (RawType::Base(*i), RawType::Base(*i)),
            RawCoercion::Ref(c, d) => {
                let (b1, a1) = c.types()?;
                let (a2, b2) = d.types()?;
                if a1 != a2 || b1 != b2 {
                    return None;
                }
                (RawType::reference(a1), RawType::reference(b1))
            }
            RawCoercion::Fun(pc, c, d) => {
                if !pc.well_typed() {
                    return None;
                }
                let (cc, a) = c.types()?;
                let (b, dd) = d.types()?;
                (RawType::fun(a, pc.target(), b), RawType::fun(cc, pc.source(), dd))
            }
        };
        Some((a.at(self.seq.source()), b.at(self.seq.target())))
    }

    pub fn source(&self) -> LType {
        self.types().expect("well-typed coercion").0
    }

    pub fn target(&self) -> LType {
        self.types().expect("well-typed coercion").1
    }

    /// Whether a raw value wrapped by this coercion is a value.
    pub fn is_irreducible(&self) -> bool {
        match self.raw {
            RawCoercion::Base(_) => self.seq.is_irreducible(),
            _ => self.seq.is_normal(),
        }
    }

    /// `self ⨝ other`
    pub fn compose(&self, other: &VCoercion) -> VCoercion {
        let raw = match (&self.raw, &other.raw) {
            (RawCoercion::Base(i), RawCoercion::Base(_)) => RawCoercion::Base(*i),
            (RawCoercion::Ref(c1, d1), RawCoercion::Ref(c2, d2)) => {
                RawCoercion::Ref(Box::new(c2.compose(c1)), Box::new(d1.compose(d2)))
            }
            (RawCoercion::Fun(pc1, c1, d1), RawCoercion::Fun(pc2, c2, d2)) => RawCoercion::Fun(
                pc2.compose(pc1).normalize_counted().0,
                Box::new(c2.compose(c1)),
                Box::new(d1.compose(d2)),
            ),
            _ => panic!("composing coercions of different shapes"),
        };
        VCoercion { raw, seq: self.seq.compose(&other.seq).normalize_counted().0 }
    }

    /// Every label coercion sequence inside the coercion, outermost first.
    pub fn sequences(&self) -> Vec<&Seq> {
        let mut v = vec![&self.seq];
        match &self.raw {
            RawCoercion::Base(_) => {}
            RawCoercion::Ref(c, d) => {
                v.extend(c.sequences());
                v.extend(d.sequences());
            }
            RawCoercion::Fun(pc, c, d) => {
                v.push(pc);
                v.extend(c.sequences());
                v.extend(d.sequences());
            }
        }
        v
    }
}

/// The identity coercion on `A`.
pub fn coerce_id(a: &LType) -> VCoercion {
    let raw = match &a.raw {
        RawType::Base(i) => RawCoercion::Base(*i),
        RawType::Ref(t) => RawCoercion::Ref(Box::new(coerce_id(t)), Box::new(coerce_id(t))),
        RawType::Fun(d, g, c) => RawCoercion::Fun(Seq::id(*g), Box::new(coerce_id(d)), Box::new(coerce_id(c))),
    };
    VCoercion { raw, seq: Seq::id(a.label) }
}

/// The coercion `A ⇒^p B`. Panics unless `A ≲ B`.
pub fn coerce(a: &LType, b: &LType, p: BlameLabel) -> VCoercion {
    let raw = match (&a.raw, &b.raw) {
        (RawType::Base(i), RawType::Base(j)) if i == j => RawCoercion::Base(*i),
        (RawType::Ref(x), RawType::Ref(y)) => RawCoercion::Ref(Box::new(coerce(y, x, p)), Box::new(coerce(x, y, p))),
        (RawType::Fun(a1, g1, b1), RawType::Fun(a2, g2, b2)) => {
            RawCoercion::Fun(coerce_label(*g2, *g1, p), Box::new(coerce(a2, a1, p)), Box::new(coerce(b1, b2, p)))
        }
        _ => panic!("no coercion from {a} to {b}"),
    };
    VCoercion { raw, seq: coerce_label(a.label, b.label, p) }
}

/// Applies a coercion to a value, composing with an existing wrapper and normalizing.
pub fn apply_cast(v: &Value, c: &VCoercion) -> Result<Value, BlameLabel> {
    let combined = match &v.wrap {
        None => c.clone(),
        Some(c0) => c0.compose(c),
    };
    match combined.seq.normalize() {
        Normalized::Blame(p) => Err(p),
        Normalized::Value(seq) => {
            let unwrap = matches!(combined.raw, RawCoercion::Base(_)) && seq.tail.is_empty();
            let wrap = (!unwrap).then_some(VCoercion { raw: combined.raw, seq });
            Ok(Value { raw: v.raw.clone(), wrap })
        }
    }
}

/// `stamp_val(V, A, ℓ)` for a value `V ⇐ A`.
pub fn stamp_val(v: &Value, a: &LType, l: Level) -> Value {
    if l == Level::Low {
        return v.clone();
    }
    match &v.wrap {
        Some(c) => Value { raw: v.raw.clone(), wrap: Some(VCoercion { raw: c.raw.clone(), seq: c.seq.stamp(l) }) },
        None => match a.label {
            Label::Known(Level::Low) => {
                let id = coerce_id(a);
                Value { raw: v.raw.clone(), wrap: Some(VCoercion { raw: id.raw, seq: Seq::id(Level::Low).stamp(l) }) }
            }
            _ => v.clone(),
        },
    }
}

impl fmt::Display for VCoercion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.raw {
            RawCoercion::Base(i) => write!(f, "<id({i}), {}>", self.seq),
            RawCoercion::Ref(c, d) => write!(f, "<Ref {c} {d}, {}>", self.seq),
            RawCoercion::Fun(pc, c, d) => write!(f, "<{pc}, {c} -> {d}, {}>", self.seq),
        }
    }
}

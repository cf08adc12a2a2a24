//! Checking-mode typing `Γ; Σ; g; ℓ ⊢ M ⇐ A` for cast calculus terms.

use thiserror::Error;

use super::{Const, Heap, HeapTyping, Term};
use crate::lattice::{Base, LType, Label, Level, RawType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} in `{term}`")]
pub struct CcTypeError {
    pub message: String,
    pub term: String,
}

/// A typing context, most recent binding last.
#[derive(Clone, Debug, Default)]
pub struct Ctx(Vec<(String, LType)>);

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    pub fn with(&self, x: &str, a: LType) -> Ctx {
        let mut v = self.0.clone();
        v.push((x.to_string(), a));
        Ctx(v)
    }

    pub fn lookup(&self, x: &str) -> Option<&LType> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, a)| a)
    }

    /// Bindings not shadowed by a later one.
    pub fn bindings(&self) -> impl Iterator<Item = (&str, &LType)> {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, (x, _))| !self.0[i + 1..].iter().any(|(y, _)| y == x))
            .map(|(_, (x, a))| (x.as_str(), a))
    }
}

fn err(m: &Term, msg: impl Into<String>) -> CcTypeError {
    let mut term = m.to_string();
    if term.len() > 160 {
        term.truncate(160);
        term.push_str("...");
    }
    CcTypeError { message: msg.into(), term }
}

fn specific(m: &Term, g: Label, what: &str) -> Result<Level, CcTypeError> {
    g.level().ok_or_else(|| err(m, format!("{what} must be a specific label, found *")))
}

fn expect_eq(m: &Term, found: &LType, expected: &LType) -> Result<(), CcTypeError> {
    if found == expected {
        Ok(())
    } else {
        Err(err(m, format!("has type {found} but {expected} was expected")))
    }
}

/// Instantiation used for premises quantified over the ambient security level.
const ANY_LEVEL: Level = Level::High;

/// Checks `Γ; Σ; g; ℓ ⊢ M ⇐ A`.
pub fn check(ctx: &Ctx, sigma: &HeapTyping, g: Label, l: Level, m: &Term, a: &LType) -> Result<(), CcTypeError> {
    let chk = |ctx: &Ctx, g: Label, l: Level, n: &Term, b: &LType| check(ctx, sigma, g, l, n, b);
    match m {
        Term::Var(x) => {
            let t = ctx.lookup(x).ok_or_else(|| err(m, format!("unbound variable {x}")))?;
            expect_eq(m, t, a)
        }
        Term::Const(k) => {
            let base = match k {
                Const::Unit => Base::Unit,
                Const::Bool(_) => Base::Bool,
            };
            specific(m, a.label, "constant label")?;
            if a.raw == RawType::Base(base) {
                Ok(())
            } else {
                Err(err(m, format!("constant cannot have type {a}")))
            }
        }
        Term::Addr(addr) => {
            specific(m, a.label, "address label")?;
            let RawType::Ref(inner) = &a.raw else {
                return Err(err(m, format!("address cannot have type {a}")));
            };
            if inner.label != Label::Known(addr.level) {
                return Err(err(m, format!("address cell level differs from {a}")));
            }
            match sigma.get(addr) {
                Some(t) if *t == inner.raw => Ok(()),
                Some(t) => Err(err(m, format!("cell holds {t}, expected {}", inner.raw))),
                None => Err(err(m, "dangling address")),
            }
        }
        Term::Lam(x, n) => {
            specific(m, a.label, "function label")?;
            let RawType::Fun(dom, pc, cod) = &a.raw else {
                return Err(err(m, format!("function cannot have type {a}")));
            };
            chk(&ctx.with(x, (**dom).clone()), *pc, ANY_LEVEL, n, cod)
        }
        Term::App { fun, arg, dom, cod, level } => {
            let amb = specific(m, g, "ambient PC of a static application")?;
            let ft = RawType::fun(dom.clone(), amb.join(*level).into(), cod.clone()).at(*level);
            chk(ctx, g, l, fun, &ft)?;
            chk(ctx, g, l, arg, dom)?;
            expect_eq(m, &cod.stamp(*level), a)
        }
        Term::AppStar { fun, arg, dom, cod } => {
            let ft = RawType::fun(dom.clone(), Label::Star, cod.clone().at(Label::Star)).at(Label::Star);
            chk(ctx, g, l, fun, &ft)?;
            chk(ctx, g, l, arg, dom)?;
            expect_eq(m, &cod.clone().at(Label::Star), a)
        }
        Term::If { cond, thn, els, ty, level } => {
            let amb = specific(m, g, "ambient PC of a static conditional")?;
            chk(ctx, g, l, cond, &LType::bool(*level))?;
            let inner: Label = amb.join(*level).into();
            chk(ctx, inner, ANY_LEVEL, thn, ty)?;
            chk(ctx, inner, ANY_LEVEL, els, ty)?;
            expect_eq(m, &ty.stamp(*level), a)
        }
        Term::IfStar { cond, thn, els, raw } => {
            chk(ctx, g, l, cond, &LType::bool(Label::Star))?;
            let t = raw.clone().at(Label::Star);
            chk(ctx, Label::Star, ANY_LEVEL, thn, &t)?;
            chk(ctx, Label::Star, ANY_LEVEL, els, &t)?;
            expect_eq(m, &t, a)
        }
        Term::Let { var, bound, ty, body } => {
            chk(ctx, g, l, bound, ty)?;
            chk(&ctx.with(var, ty.clone()), g, l, body, a)
        }
        Term::Ref { level, raw, init } => {
            let amb = specific(m, g, "ambient PC of a static allocation")?;
            if !amb.leq(*level) {
                return Err(err(m, format!("allocation at {level} under PC {amb}")));
            }
            chk(ctx, g, l, init, &raw.clone().at(*level))?;
            expect_eq(m, &RawType::reference(raw.clone().at(*level)).at(Level::Low), a)
        }
        Term::RefStar { level, raw, init, .. } => {
            if g != Label::Star {
                return Err(err(m, "checked allocation requires PC *"));
            }
            chk(ctx, g, l, init, &raw.clone().at(*level))?;
            expect_eq(m, &RawType::reference(raw.clone().at(*level)).at(Level::Low), a)
        }
        Term::Deref { r, ty, level } => {
            chk(ctx, g, l, r, &RawType::reference(ty.clone()).at(*level))?;
            expect_eq(m, &ty.stamp(*level), a)
        }
        Term::DerefStar { r, raw } => {
            chk(ctx, g, l, r, &RawType::reference(raw.clone().at(Label::Star)).at(Label::Star))?;
            expect_eq(m, &raw.clone().at(Label::Star), a)
        }
        Term::Assign { lhs, rhs, raw, cell, level } => {
            let amb = specific(m, g, "ambient PC of a static assignment")?;
            chk(ctx, g, l, lhs, &RawType::reference(raw.clone().at(*cell)).at(*level))?;
            chk(ctx, g, l, rhs, &raw.clone().at(*cell))?;
            if !amb.join(*level).leq(*cell) {
                return Err(err(m, format!("write to a {cell} cell at level {}", amb.join(*level))));
            }
            expect_eq(m, &LType::unit(Level::Low), a)
        }
        Term::AssignStar { lhs, rhs, raw, cell, .. } => {
            chk(ctx, g, l, lhs, &RawType::reference(raw.clone().at(*cell)).at(Label::Star))?;
            chk(ctx, g, l, rhs, &raw.clone().at(*cell))?;
            expect_eq(m, &LType::unit(Level::Low), a)
        }
        Term::Prot { pc, level, body, ty } => {
            if !pc.well_formed() {
                return Err(err(m, format!("malformed PC {pc}")));
            }
            let sec = pc.security();
            if !l.join(*level).leq(sec) {
                return Err(err(m, format!("protected level {} above PC security {sec}", l.join(*level))));
            }
            chk(ctx, pc.label(), sec, body, ty)?;
            expect_eq(m, &ty.stamp(*level), a)
        }
        Term::Cast(n, c) => {
            let (src, tgt) = c.types().ok_or_else(|| err(m, "ill-typed coercion"))?;
            chk(ctx, g, l, n, &src)?;
            expect_eq(m, &tgt, a)
        }
        Term::Blame(_) => Ok(()),
    }
}

/// Checks that every cell holds a value of its recorded type.
pub fn check_heap(sigma: &HeapTyping, heap: &Heap) -> Result<(), CcTypeError> {
    for (addr, v) in heap.iter() {
        let raw = sigma.get(addr).ok_or_else(|| CcTypeError {
            message: format!("cell {addr} missing from heap typing"),
            term: String::new(),
        })?;
        let t = v.to_term();
        check(&Ctx::new(), sigma, Label::LOW, Level::Low, &t, &raw.clone().at(addr.level))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::Addr;

    #[test]
    fn constants_need_specific_labels() {
        let s = HeapTyping::new();
        let t = Term::Const(Const::Bool(true));
        assert!(check(&Ctx::new(), &s, Label::LOW, Level::Low, &t, &LType::bool(Level::High)).is_ok());
        assert!(check(&Ctx::new(), &s, Label::LOW, Level::Low, &t, &LType::bool(Label::Star)).is_err());
    }

    #[test]
    fn addresses_follow_heap_typing() {
        let mut s = HeapTyping::new();
        let a = Addr { level: Level::High, index: 0 };
        s.insert(a, RawType::bool());
        let good = RawType::reference(LType::bool(Level::High)).at(Level::Low);
        let bad = RawType::reference(LType::bool(Level::Low)).at(Level::Low);
        assert!(check(&Ctx::new(), &s, Label::LOW, Level::Low, &Term::Addr(a), &good).is_ok());
        assert!(check(&Ctx::new(), &s, Label::LOW, Level::Low, &Term::Addr(a), &bad).is_err());
    }

    #[test]
    fn static_assignment_respects_flow() {
        let s = HeapTyping::new();
        let ctx = Ctx::new().with("r", RawType::reference(LType::bool(Level::Low)).at(Level::Low));
        let t = Term::Assign {
            lhs: Box::new(Term::Var("r".into())),
            rhs: Box::new(Term::Const(Const::Bool(false))),
            raw: RawType::bool(),
            cell: Level::Low,
            level: Level::Low,
        };
        let unit = LType::unit(Level::Low);
        assert!(check(&ctx, &s, Label::LOW, Level::Low, &t, &unit).is_ok());
        assert!(check(&ctx, &s, Label::HIGH, Level::Low, &t, &unit).is_err());
    }
}

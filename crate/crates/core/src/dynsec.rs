//! A dynamically checked IFC language with no-sensitive-upgrade checks,
//! the type-directed erasure of cast calculus terms into it, and the
//! simulation relation between their values.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cc::{self, Addr, Const, RawValue};
use crate::coercion::BlameLabel;
use crate::lattice::{LType, Label, Level, RawType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DTerm {
    Var(String),
    Const(Const, Level),
    /// `(addr n_ℓ̂)_ℓ`
    Addr(Addr, Level),
    Lam(String, Box<DTerm>, Level),
    App(Box<DTerm>, Box<DTerm>),
    If(Box<DTerm>, Box<DTerm>, Box<DTerm>),
    /// `ref? ℓ M`, with the blame label of the checked allocation it came from, if any.
    Ref(Level, Box<DTerm>, Option<BlameLabel>),
    Deref(Box<DTerm>),
    Assign(Box<DTerm>, Box<DTerm>, Option<BlameLabel>),
    Prot(Level, Box<DTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DRaw {
    Const(Const),
    Addr(Addr),
    Lam(String, Box<DTerm>),
}

/// A labeled value `V_ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DValue {
    pub raw: DRaw,
    pub level: Level,
}

impl DValue {
    pub fn stamp(&self, l: Level) -> DValue {
        DValue { raw: self.raw.clone(), level: self.level.join(l) }
    }

    pub fn to_term(&self) -> DTerm {
        match &self.raw {
            DRaw::Const(k) => DTerm::Const(*k, self.level),
            DRaw::Addr(a) => DTerm::Addr(*a, self.level),
            DRaw::Lam(x, n) => DTerm::Lam(x.clone(), n.clone(), self.level),
        }
    }
}

impl DTerm {
    pub fn as_value(&self) -> Option<DValue> {
        match self {
            DTerm::Const(k, l) => Some(DValue { raw: DRaw::Const(*k), level: *l }),
            DTerm::Addr(a, l) => Some(DValue { raw: DRaw::Addr(*a), level: *l }),
            DTerm::Lam(x, n, l) => Some(DValue { raw: DRaw::Lam(x.clone(), n.clone()), level: *l }),
            _ => None,
        }
    }

    pub fn subst(&self, x: &str, v: &DTerm) -> DTerm {
        let s = |m: &DTerm| Box::new(m.subst(x, v));
        match self {
            DTerm::Var(y) if y == x => v.clone(),
            DTerm::Var(_) | DTerm::Const(..) | DTerm::Addr(..) => self.clone(),
            DTerm::Lam(y, _, _) if y == x => self.clone(),
            DTerm::Lam(y, n, l) => DTerm::Lam(y.clone(), s(n), *l),
            DTerm::App(a, b) => DTerm::App(s(a), s(b)),
            DTerm::If(a, b, c) => DTerm::If(s(a), s(b), s(c)),
            DTerm::Ref(l, m, p) => DTerm::Ref(*l, s(m), *p),
            DTerm::Deref(m) => DTerm::Deref(s(m)),
            DTerm::Assign(a, b, p) => DTerm::Assign(s(a), s(b), *p),
            DTerm::Prot(l, m) => DTerm::Prot(*l, s(m)),
        }
    }
}

/// Where a no-sensitive-upgrade check failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NsuSite {
    Ref(Level, Option<BlameLabel>),
    Assign(Addr, Option<BlameLabel>),
}

impl fmt::Display for NsuSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (what, p) = match self {
            NsuSite::Ref(l, p) => (format!("ref? {l}"), p),
            NsuSite::Assign(a, p) => (format!("assignment to {a}"), p),
        };
        match p {
            Some(p) => write!(f, "{what} ({p})"),
            None => f.write_str(&what),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DOutcome {
    Value(DValue),
    Nsu(NsuSite),
    Stuck(String),
    Timeout,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DHeap {
    cells: BTreeMap<Addr, DValue>,
}

impl DHeap {
    pub fn get(&self, a: Addr) -> Option<&DValue> {
        self.cells.get(&a)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

enum DStep {
    Next(DTerm),
    Nsu(NsuSite),
}

fn step(m: DTerm, pc: Level, heap: &mut DHeap) -> Result<DStep, String> {
    use DStep::Next;
    macro_rules! sub {
        ($inner:expr, $pc:expr, $rebuild:expr) => {{
            return Ok(match step(*$inner, $pc, heap)? {
                Next(n) => Next($rebuild(Box::new(n))),
                nsu => nsu,
            });
        }};
    }
    match m {
        DTerm::App(f, a) => {
            if f.as_value().is_none() {
                sub!(f, pc, |f| DTerm::App(f, a));
            }
            if a.as_value().is_none() {
                sub!(a, pc, |a| DTerm::App(f, a));
            }
            let DTerm::Lam(x, n, l) = *f else { return Err("applying a non-function".into()) };
            Ok(Next(DTerm::Prot(l, Box::new(n.subst(&x, &a)))))
        }
        DTerm::If(c, t, e) => {
            if c.as_value().is_none() {
                sub!(c, pc, |c| DTerm::If(c, t, e));
            }
            let DTerm::Const(Const::Bool(b), l) = *c else { return Err("branching on a non-boolean".into()) };
            Ok(Next(DTerm::Prot(l, if b { t } else { e })))
        }
        DTerm::Ref(l, m, p) => {
            let Some(v) = m.as_value() else { sub!(m, pc, |m| DTerm::Ref(l, m, p)) };
            if !pc.leq(l) {
                return Ok(DStep::Nsu(NsuSite::Ref(l, p)));
            }
            let index = heap.cells.keys().filter(|a| a.level == l).count();
            let a = Addr { level: l, index };
            heap.cells.insert(a, v.stamp(l));
            Ok(Next(DTerm::Addr(a, Level::Low)))
        }
        DTerm::Deref(m) => {
            if m.as_value().is_none() {
                sub!(m, pc, DTerm::Deref);
            }
            let DTerm::Addr(a, l) = *m else { return Err("dereferencing a non-address".into()) };
            let v = heap.cells.get(&a).ok_or("dangling address")?;
            Ok(Next(DTerm::Prot(l, Box::new(v.to_term()))))
        }
        DTerm::Assign(r, m, p) => {
            if r.as_value().is_none() {
                sub!(r, pc, |r| DTerm::Assign(r, m, p));
            }
            let Some(v) = m.as_value() else { sub!(m, pc, |m| DTerm::Assign(r, m, p)) };
            let DTerm::Addr(a, l) = *r else { return Err("assigning through a non-address".into()) };
            if !pc.join(l).leq(a.level) {
                return Ok(DStep::Nsu(NsuSite::Assign(a, p)));
            }
            let slot = heap.cells.get_mut(&a).ok_or("dangling address")?;
            *slot = v.stamp(a.level);
            Ok(Next(DTerm::Const(Const::Unit, Level::Low)))
        }
        DTerm::Prot(l, m) => match m.as_value() {
            Some(v) => Ok(Next(v.stamp(l).to_term())),
            None => sub!(m, pc.join(l), |m| DTerm::Prot(l, m)),
        },
        DTerm::Var(x) => Err(format!("free variable {x}")),
        DTerm::Const(..) | DTerm::Addr(..) | DTerm::Lam(..) => Err("no rule applies".into()),
    }
}

/// Runs a closed term from PC `low` and an empty heap.
pub fn run(term: DTerm, fuel: usize) -> (DOutcome, DHeap) {
    let mut heap = DHeap::default();
    let mut m = term;
    for _ in 0..fuel {
        if let Some(v) = m.as_value() {
            return (DOutcome::Value(v), heap);
        }
        match step(m, Level::Low, &mut heap) {
            Ok(DStep::Next(n)) => m = n,
            Ok(DStep::Nsu(site)) => return (DOutcome::Nsu(site), heap),
            Err(msg) => return (DOutcome::Stuck(msg), heap),
        }
    }
    match m.as_value() {
        Some(v) => (DOutcome::Value(v), heap),
        None => (DOutcome::Timeout, heap),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot erase `{term}` at type {ty}: {reason}")]
pub struct EraseError {
    pub term: String,
    pub ty: String,
    pub reason: &'static str,
}

fn specific(m: &cc::Term, ty: &LType) -> Result<Level, EraseError> {
    ty.label.level().ok_or_else(|| EraseError {
        term: m.to_string(),
        ty: ty.to_string(),
        reason: "raw value at an unknown label",
    })
}

/// Type-directed erasure of a cast calculus term checked against `ty`.
pub fn erase(m: &cc::Term, ty: &LType) -> Result<DTerm, EraseError> {
    use cc::Term as T;
    let b = |t: DTerm| Box::new(t);
    let bad = |reason| EraseError { term: m.to_string(), ty: ty.to_string(), reason };
    Ok(match m {
        T::Var(x) => DTerm::Var(x.clone()),
        T::Const(k) => DTerm::Const(*k, specific(m, ty)?),
        T::Addr(a) => DTerm::Addr(*a, specific(m, ty)?),
        T::Lam(x, n) => {
            let RawType::Fun(_, _, cod) = &ty.raw else { return Err(bad("function at a non-function type")) };
            DTerm::Lam(x.clone(), b(erase(n, cod)?), specific(m, ty)?)
        }
        T::App { fun, arg, dom, cod, level } => {
            let ft = RawType::fun(dom.clone(), Label::Star, cod.clone()).at(*level);
            DTerm::App(b(erase(fun, &ft)?), b(erase(arg, dom)?))
        }
        T::AppStar { fun, arg, dom, cod } => {
            let ft = RawType::fun(dom.clone(), Label::Star, cod.clone().at(Label::Star)).at(Label::Star);
            DTerm::App(b(erase(fun, &ft)?), b(erase(arg, dom)?))
        }
        T::If { cond, thn, els, ty: a, level } => {
            DTerm::If(b(erase(cond, &LType::bool(*level))?), b(erase(thn, a)?), b(erase(els, a)?))
        }
        T::IfStar { cond, thn, els, raw } => {
            let a = raw.clone().at(Label::Star);
            DTerm::If(b(erase(cond, &LType::bool(Label::Star))?), b(erase(thn, &a)?), b(erase(els, &a)?))
        }
        T::Let { var, bound, ty: a, body } => {
            DTerm::App(b(DTerm::Lam(var.clone(), b(erase(body, ty)?), Level::Low)), b(erase(bound, a)?))
        }
        T::Ref { level, raw, init } => DTerm::Ref(*level, b(erase(init, &raw.clone().at(*level))?), None),
        T::RefStar { blame, level, raw, init } => {
            DTerm::Ref(*level, b(erase(init, &raw.clone().at(*level))?), Some(*blame))
        }
        T::Deref { r, ty: a, level } => DTerm::Deref(b(erase(r, &RawType::reference(a.clone()).at(*level))?)),
        T::DerefStar { r, raw } => {
            DTerm::Deref(b(erase(r, &RawType::reference(raw.clone().at(Label::Star)).at(Label::Star))?))
        }
        T::Assign { lhs, rhs, raw, cell, level } => {
            let cell_ty = raw.clone().at(*cell);
            DTerm::Assign(
                b(erase(lhs, &RawType::reference(cell_ty.clone()).at(*level))?),
                b(erase(rhs, &cell_ty)?),
                None,
            )
        }
        T::AssignStar { blame, lhs, rhs, raw, cell } => {
            let cell_ty = raw.clone().at(*cell);
            DTerm::Assign(
                b(erase(lhs, &RawType::reference(cell_ty.clone()).at(Label::Star))?),
                b(erase(rhs, &cell_ty)?),
                Some(*blame),
            )
        }
        T::Prot { level, body, ty: a, .. } => DTerm::Prot(*level, b(erase(body, a)?)),
        T::Cast(n, c) => {
            let (src, _) = c.types().ok_or_else(|| bad("ill-typed coercion"))?;
            erase(n, &src)?
        }
        T::Blame(_) => return Err(bad("blame has no counterpart")),
    })
}

/// The simulation relation between a dynamic value and a cast calculus value of type `ty`.
pub fn value_sim(d: &DValue, v: &cc::Value, ty: &LType) -> bool {
    let bound = match &v.wrap {
        Some(c) => c.seq.security(),
        None => match ty.label.level() {
            Some(l) => l,
            None => return false,
        },
    };
    if !d.level.leq(bound) {
        return false;
    }
    match (&d.raw, &v.raw) {
        (DRaw::Const(a), RawValue::Const(b)) => a == b,
        (DRaw::Addr(a), RawValue::Addr(b)) => a == b,
        (DRaw::Lam(..), RawValue::Lam(..)) => true,
        _ => false,
    }
}

impl fmt::Display for DValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.raw {
            DRaw::Const(k) => write!(f, "{k}@{}", self.level),
            DRaw::Addr(a) => write!(f, "{a}@{}", self.level),
            DRaw::Lam(..) => write!(f, "<closure>@{}", self.level),
        }
    }
}

impl fmt::Display for DTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DTerm::Var(x) => f.write_str(x),
            DTerm::Const(k, l) => write!(f, "{k}@{l}"),
            DTerm::Addr(a, l) => write!(f, "{a}@{l}"),
            DTerm::Lam(x, n, l) => write!(f, "(lam {x} . {n})@{l}"),
            DTerm::App(a, b) => write!(f, "({a} {b})"),
            DTerm::If(a, b, c) => write!(f, "(if {a} then {b} else {c})"),
            DTerm::Ref(l, m, _) => write!(f, "(ref? {l} {m})"),
            DTerm::Deref(m) => write!(f, "!{m}"),
            DTerm::Assign(a, b, _) => write!(f, "({a} :=? {b})"),
            DTerm::Prot(l, m) => write!(f, "(prot {l} {m})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boolean(b: bool, l: Level) -> DTerm {
        DTerm::Const(Const::Bool(b), l)
    }

    #[test]
    fn branch_on_secret_raises_label() {
        let t = DTerm::If(
            Box::new(boolean(true, Level::High)),
            Box::new(boolean(false, Level::Low)),
            Box::new(boolean(true, Level::Low)),
        );
        let (o, _) = run(t, 100);
        assert_eq!(o, DOutcome::Value(DValue { raw: DRaw::Const(Const::Bool(false)), level: Level::High }));
    }

    #[test]
    fn sensitive_upgrade_is_rejected() {
        // let a = ref? low true in if high-secret then a :=? false else unit
        let body = DTerm::If(
            Box::new(boolean(true, Level::High)),
            Box::new(DTerm::Assign(Box::new(DTerm::Var("a".into())), Box::new(boolean(false, Level::Low)), None)),
            Box::new(DTerm::Const(Const::Unit, Level::Low)),
        );
        let t = DTerm::App(
            Box::new(DTerm::Lam("a".into(), Box::new(body), Level::Low)),
            Box::new(DTerm::Ref(Level::Low, Box::new(boolean(true, Level::Low)), None)),
        );
        let (o, _) = run(t, 100);
        assert!(matches!(o, DOutcome::Nsu(NsuSite::Assign(..))));
    }
}

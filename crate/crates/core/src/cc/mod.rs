//! The cast calculus: terms, values, heaps, typing, and the reduction machine.

mod machine;
mod typing;

use std::collections::BTreeMap;
use std::fmt;

pub use machine::{Machine, MachineConfig, Mutation, Outcome, Run, TraceLine};
pub use typing::{check, check_heap, CcTypeError, Ctx};

use crate::coercion::BlameLabel;
use crate::lattice::{LType, Level, RawType};
use crate::pc::Pc;
use crate::vcoercion::VCoercion;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Unit,
    Bool(bool),
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Unit => f.write_str("unit"),
            Const::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A heap address: the level of the cell's partition and its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr {
    pub level: Level,
    pub index: usize,
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "addr({},{})", self.level, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(Const),
    Addr(Addr),
    Lam(String, Box<Term>),
    App {
        fun: Box<Term>,
        arg: Box<Term>,
        dom: LType,
        cod: LType,
        level: Level,
    },
    AppStar {
        fun: Box<Term>,
        arg: Box<Term>,
        dom: LType,
        cod: RawType,
    },
    If {
        cond: Box<Term>,
        thn: Box<Term>,
        els: Box<Term>,
        ty: LType,
        level: Level,
    },
    IfStar {
        cond: Box<Term>,
        thn: Box<Term>,
        els: Box<Term>,
        raw: RawType,
    },
    Let {
        var: String,
        bound: Box<Term>,
        ty: LType,
        body: Box<Term>,
    },
    /// `ref ℓ M`; `raw` is the raw type of the cell contents.
    Ref {
        level: Level,
        raw: RawType,
        init: Box<Term>,
    },
    RefStar {
        blame: BlameLabel,
        level: Level,
        raw: RawType,
        init: Box<Term>,
    },
    Deref {
        r: Box<Term>,
        ty: LType,
        level: Level,
    },
    DerefStar {
        r: Box<Term>,
        raw: RawType,
    },
    Assign {
        lhs: Box<Term>,
        rhs: Box<Term>,
        raw: RawType,
        cell: Level,
        level: Level,
    },
    AssignStar {
        blame: BlameLabel,
        lhs: Box<Term>,
        rhs: Box<Term>,
        raw: RawType,
        cell: crate::lattice::Label,
    },
    Prot {
        pc: Pc,
        level: Level,
        body: Box<Term>,
        ty: LType,
    },
    Cast(Box<Term>, VCoercion),
    Blame(BlameLabel),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawValue {
    Const(Const),
    Addr(Addr),
    Lam(String, Box<Term>),
}

/// A value: a raw value, possibly wrapped in an irreducible coercion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Value {
    pub raw: RawValue,
    pub wrap: Option<VCoercion>,
}

impl Value {
    pub fn raw(raw: RawValue) -> Value {
        Value { raw, wrap: None }
    }

    pub fn to_term(&self) -> Term {
        let raw = match &self.raw {
            RawValue::Const(k) => Term::Const(*k),
            RawValue::Addr(a) => Term::Addr(*a),
            RawValue::Lam(x, n) => Term::Lam(x.clone(), n.clone()),
        };
        match &self.wrap {
            None => raw,
            Some(c) => Term::Cast(Box::new(raw), c.clone()),
        }
    }

    /// Renders a value of type `ty`, e.g. `true@low` or `true@low<id(Bool), id(low);up>`.
    pub fn render(&self, ty: &LType) -> String {
        let src = self.wrap.as_ref().map_or(ty.label, |c| c.seq.source());
        let raw = match &self.raw {
            RawValue::Const(k) => format!("{k}@{src}"),
            RawValue::Addr(a) => format!("{a}@{src}"),
            RawValue::Lam(..) => format!("<closure>@{src}"),
        };
        match &self.wrap {
            None => raw,
            Some(c) => format!("{raw}{c}"),
        }
    }
}

impl Term {
    fn raw_value(&self) -> Option<RawValue> {
        match self {
            Term::Const(k) => Some(RawValue::Const(*k)),
            Term::Addr(a) => Some(RawValue::Addr(*a)),
            Term::Lam(x, n) => Some(RawValue::Lam(x.clone(), n.clone())),
            _ => None,
        }
    }

    pub fn as_value(&self) -> Option<Value> {
        match self {
            Term::Cast(m, c) if c.is_irreducible() => Some(Value { raw: m.raw_value()?, wrap: Some(c.clone()) }),
            _ => self.raw_value().map(Value::raw),
        }
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Const(_) | Term::Addr(_) | Term::Lam(..) => true,
            Term::Cast(m, c) => matches!(**m, Term::Const(_) | Term::Addr(_) | Term::Lam(..)) && c.is_irreducible(),
            _ => false,
        }
    }

    /// Substitutes the closed term `v` for `x`.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        let s = |m: &Term| Box::new(m.subst(x, v));
        match self {
            Term::Var(y) if y == x => v.clone(),
            Term::Var(_) | Term::Const(_) | Term::Addr(_) | Term::Blame(_) => self.clone(),
            Term::Lam(y, _) if y == x => self.clone(),
            Term::Lam(y, n) => Term::Lam(y.clone(), s(n)),
            Term::App { fun, arg, dom, cod, level } => {
                Term::App { fun: s(fun), arg: s(arg), dom: dom.clone(), cod: cod.clone(), level: *level }
            }
            Term::AppStar { fun, arg, dom, cod } => {
                Term::AppStar { fun: s(fun), arg: s(arg), dom: dom.clone(), cod: cod.clone() }
            }
            Term::If { cond, thn, els, ty, level } => {
                Term::If { cond: s(cond), thn: s(thn), els: s(els), ty: ty.clone(), level: *level }
            }
            Term::IfStar { cond, thn, els, raw } => {
                Term::IfStar { cond: s(cond), thn: s(thn), els: s(els), raw: raw.clone() }
            }
            Term::Let { var, bound, ty, body } => Term::Let {
                var: var.clone(),
                bound: s(bound),
                ty: ty.clone(),
                body: if var == x { body.clone() } else { s(body) },
            },
            Term::Ref { level, raw, init } => Term::Ref { level: *level, raw: raw.clone(), init: s(init) },
            Term::RefStar { blame, level, raw, init } => {
                Term::RefStar { blame: *blame, level: *level, raw: raw.clone(), init: s(init) }
            }
            Term::Deref { r, ty, level } => Term::Deref { r: s(r), ty: ty.clone(), level: *level },
            Term::DerefStar { r, raw } => Term::DerefStar { r: s(r), raw: raw.clone() },
            Term::Assign { lhs, rhs, raw, cell, level } => {
                Term::Assign { lhs: s(lhs), rhs: s(rhs), raw: raw.clone(), cell: *cell, level: *level }
            }
            Term::AssignStar { blame, lhs, rhs, raw, cell } => {
                Term::AssignStar { blame: *blame, lhs: s(lhs), rhs: s(rhs), raw: raw.clone(), cell: *cell }
            }
            Term::Prot { pc, level, body, ty } => {
                Term::Prot { pc: pc.clone(), level: *level, body: s(body), ty: ty.clone() }
            }
            Term::Cast(m, c) => Term::Cast(s(m), c.clone()),
        }
    }

    /// Constructor name, used for construct coverage histograms.
    pub fn kind(&self) -> &'static str {
        match self {
            Term::Var(_) => "var",
            Term::Const(_) => "const",
            Term::Addr(_) => "addr",
            Term::Lam(..) => "lam",
            Term::App { .. } => "app",
            Term::AppStar { .. } => "app*",
            Term::If { .. } => "if",
            Term::IfStar { .. } => "if*",
            Term::Let { .. } => "let",
            Term::Ref { .. } => "ref",
            Term::RefStar { .. } => "ref?",
            Term::Deref { .. } => "!",
            Term::DerefStar { .. } => "!*",
            Term::Assign { .. } => "assign",
            Term::AssignStar { .. } => "assign?",
            Term::Prot { .. } => "prot",
            Term::Cast(..) => "cast",
            Term::Blame(_) => "blame",
        }
    }

    /// Immediate subterms, left to right.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Addr(_) | Term::Blame(_) => vec![],
            Term::Lam(_, n) => vec![n],
            Term::App { fun, arg, .. } | Term::AppStar { fun, arg, .. } => vec![fun, arg],
            Term::If { cond, thn, els, .. } | Term::IfStar { cond, thn, els, .. } => vec![cond, thn, els],
            Term::Let { bound, body, .. } => vec![bound, body],
            Term::Ref { init, .. } | Term::RefStar { init, .. } => vec![init],
            Term::Deref { r, .. } | Term::DerefStar { r, .. } => vec![r],
            Term::Assign { lhs, rhs, .. } | Term::AssignStar { lhs, rhs, .. } => vec![lhs, rhs],
            Term::Prot { body, .. } => vec![body],
            Term::Cast(m, _) => vec![m],
        }
    }

    /// Visits every subterm in pre-order.
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }
}

/// The heap, partitioned by cell level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Heap {
    cells: BTreeMap<Addr, Value>,
}

impl Heap {
    pub fn alloc(&mut self, level: Level, v: Value) -> Addr {
        let index = self.cells.keys().filter(|a| a.level == level).count();
        let a = Addr { level, index };
        self.cells.insert(a, v);
        a
    }

    pub fn get(&self, a: Addr) -> Option<&Value> {
        self.cells.get(&a)
    }

    pub fn set(&mut self, a: Addr, v: Value) -> bool {
        match self.cells.get_mut(&a) {
            Some(slot) => {
                *slot = v;
                true
            }
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Addr, &Value)> {
        self.cells.iter()
    }
}

/// Heap typing: the raw type of every allocated cell.
pub type HeapTyping = BTreeMap<Addr, RawType>;

fn raw_paren(t: &RawType) -> String {
    match t {
        RawType::Ref(_) => format!("({t})"),
        _ => t.to_string(),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Const(k) => write!(f, "${k}"),
            Term::Addr(a) => write!(f, "{a}"),
            Term::Lam(x, n) => write!(f, "(lam {x} {n})"),
            Term::App { fun, arg, dom, cod, level } => write!(f, "(app {fun} {arg} [{dom}] [{cod}] {level})"),
            Term::AppStar { fun, arg, dom, cod } => write!(f, "(app* {fun} {arg} [{dom}] {})", raw_paren(cod)),
            Term::If { cond, thn, els, ty, level } => write!(f, "(if {cond} [{ty}] {level} {thn} {els})"),
            Term::IfStar { cond, thn, els, raw } => write!(f, "(if* {cond} {} {thn} {els})", raw_paren(raw)),
            Term::Let { var, bound, ty, body } => write!(f, "(let {var} {bound} [{ty}] {body})"),
            Term::Ref { level, raw, init } => write!(f, "(ref {level} {} {init})", raw_paren(raw)),
            Term::RefStar { blame, level, raw, init } => {
                write!(f, "(ref? {blame} {level} {} {init})", raw_paren(raw))
            }
            Term::Deref { r, ty, level } => write!(f, "(! {r} [{ty}] {level})"),
            Term::DerefStar { r, raw } => write!(f, "(!* {r} {})", raw_paren(raw)),
            Term::Assign { lhs, rhs, raw, cell, level } => {
                write!(f, "(assign {lhs} {rhs} {} {cell} {level})", raw_paren(raw))
            }
            Term::AssignStar { blame, lhs, rhs, raw, cell } => {
                write!(f, "(assign? {blame} {lhs} {rhs} {} {cell})", raw_paren(raw))
            }
            Term::Prot { pc, level, body, ty } => write!(f, "(prot {pc} {level} {body} [{ty}])"),
            Term::Cast(m, c) => write!(f, "(cast {m} {c})"),
            Term::Blame(p) => write!(f, "(blame {p})"),
        }
    }
}

//! The gradual surface language: syntax, parsing, typing, and precision.

mod parse;
mod precision;
mod typeck;

use std::fmt;

pub use parse::{parse_program, parse_type, ParseError, ParseOptions};
pub use precision::{erode_site, label_sites, precise_leq};
pub use typeck::{check_program, infer, program_ctx, rules, TypeError, INPUT};

use crate::cc::Const;
use crate::coercion::BlameLabel;
use crate::lattice::{LType, Label, Level};

/// A byte range in the source text. Spans never affect term equality.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    Const(Const, Level),
    Lam { pc: Label, var: String, ann: LType, body: Box<Expr>, level: Level },
    App { fun: Box<Expr>, arg: Box<Expr>, blame: BlameLabel },
    If { cond: Box<Expr>, thn: Box<Expr>, els: Box<Expr>, blame: BlameLabel },
    Let { var: String, bound: Box<Expr>, body: Box<Expr> },
    Ref { level: Level, init: Box<Expr>, blame: BlameLabel },
    Deref { r: Box<Expr>, blame: BlameLabel },
    Assign { lhs: Box<Expr>, rhs: Box<Expr>, blame: BlameLabel },
    Ann { e: Box<Expr>, ty: LType, blame: BlameLabel },
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Expr {
        Expr { kind, span: Span::default() }
    }
}

/// Builders for constructing terms in code.
pub mod build {
    use super::*;

    const P: BlameLabel = BlameLabel(0);

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    pub fn var(x: &str) -> Expr {
        ExprKind::Var(x.to_string()).into()
    }

    pub fn boolean(v: bool, l: Level) -> Expr {
        ExprKind::Const(Const::Bool(v), l).into()
    }

    pub fn unit(l: Level) -> Expr {
        ExprKind::Const(Const::Unit, l).into()
    }

    pub fn lam(pc: Label, x: &str, ann: LType, body: Expr, level: Level) -> Expr {
        ExprKind::Lam { pc, var: x.to_string(), ann, body: b(body), level }.into()
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        ExprKind::App { fun: b(f), arg: b(a), blame: P }.into()
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        ExprKind::If { cond: b(c), thn: b(t), els: b(e), blame: P }.into()
    }

    pub fn let_in(x: &str, bound: Expr, body: Expr) -> Expr {
        ExprKind::Let { var: x.to_string(), bound: b(bound), body: b(body) }.into()
    }

    pub fn reference(level: Level, init: Expr) -> Expr {
        ExprKind::Ref { level, init: b(init), blame: P }.into()
    }

    pub fn deref(r: Expr) -> Expr {
        ExprKind::Deref { r: b(r), blame: P }.into()
    }

    pub fn assign(l: Expr, r: Expr) -> Expr {
        ExprKind::Assign { lhs: b(l), rhs: b(r), blame: P }.into()
    }

    pub fn ann(e: Expr, ty: LType) -> Expr {
        ExprKind::Ann { e: b(e), ty, blame: P }.into()
    }
}

impl Expr {
    /// Immediate subterms, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Const(..) => vec![],
            ExprKind::Lam { body, .. } => vec![body],
            ExprKind::App { fun, arg, .. } => vec![fun, arg],
            ExprKind::If { cond, thn, els, .. } => vec![cond, thn, els],
            ExprKind::Let { bound, body, .. } => vec![bound, body],
            ExprKind::Ref { init, .. } => vec![init],
            ExprKind::Deref { r, .. } => vec![r],
            ExprKind::Assign { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Ann { e, .. } => vec![e],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Var(_) | ExprKind::Const(..) => vec![],
            ExprKind::Lam { body, .. } => vec![body],
            ExprKind::App { fun, arg, .. } => vec![fun, arg],
            ExprKind::If { cond, thn, els, .. } => vec![cond, thn, els],
            ExprKind::Let { bound, body, .. } => vec![bound, body],
            ExprKind::Ref { init, .. } => vec![init],
            ExprKind::Deref { r, .. } => vec![r],
            ExprKind::Assign { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Ann { e, .. } => vec![e],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ExprKind::Var(_) => "var",
            ExprKind::Const(..) => "const",
            ExprKind::Lam { .. } => "lam",
            ExprKind::App { .. } => "app",
            ExprKind::If { .. } => "if",
            ExprKind::Let { .. } => "let",
            ExprKind::Ref { .. } => "ref",
            ExprKind::Deref { .. } => "deref",
            ExprKind::Assign { .. } => "assign",
            ExprKind::Ann { .. } => "ann",
        }
    }

    fn blame_mut(&mut self) -> Option<&mut BlameLabel> {
        match &mut self.kind {
            ExprKind::App { blame, .. }
            | ExprKind::If { blame, .. }
            | ExprKind::Ref { blame, .. }
            | ExprKind::Deref { blame, .. }
            | ExprKind::Assign { blame, .. }
            | ExprKind::Ann { blame, .. } => Some(blame),
            _ => None,
        }
    }

    /// Assigns blame labels `p1, p2, ...` to blame-carrying nodes in pre-order.
    pub fn number_blame(&mut self) {
        fn go(e: &mut Expr, next: &mut u32) {
            if let Some(b) = e.blame_mut() {
                *next += 1;
                *b = BlameLabel(*next);
            }
            for c in e.children_mut() {
                go(c, next);
            }
        }
        go(self, &mut 0);
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Visits every node in pre-order.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Finds the node whose blame label is `p`.
    pub fn find_blame(&self, p: BlameLabel) -> Option<&Expr> {
        find_ref(self, p)
    }
}

fn find_ref(e: &Expr, p: BlameLabel) -> Option<&Expr> {
    let here = matches!(&e.kind,
        ExprKind::App { blame, .. }
        | ExprKind::If { blame, .. }
        | ExprKind::Ref { blame, .. }
        | ExprKind::Deref { blame, .. }
        | ExprKind::Assign { blame, .. }
        | ExprKind::Ann { blame, .. } if *blame == p);
    if here {
        return Some(e);
    }
    e.children().into_iter().find_map(|c| find_ref(c, p))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    Fun,
    Atom,
}

fn write_expr(e: &Expr, prec: Prec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match &e.kind {
        ExprKind::Var(_)
        | ExprKind::Const(..)
        | ExprKind::Ann { .. }
        | ExprKind::Ref { .. }
        | ExprKind::Deref { .. } => Prec::Atom,
        ExprKind::App { .. } => Prec::Fun,
        _ => Prec::Top,
    };
    if own < prec {
        f.write_str("(")?;
        write_expr(e, Prec::Top, f)?;
        return f.write_str(")");
    }
    match &e.kind {
        ExprKind::Var(x) => f.write_str(x),
        ExprKind::Const(k, l) => write!(f, "{k}@{l}"),
        ExprKind::Lam { pc, var, ann, body, level } => {
            write!(f, "lam [{pc}] ({var} : {ann}) . ")?;
            write_expr(body, Prec::Top, f)?;
            write!(f, " @{level}")
        }
        ExprKind::App { fun, arg, .. } => {
            write_expr(fun, Prec::Fun, f)?;
            f.write_str(" ")?;
            write_expr(arg, Prec::Atom, f)
        }
        ExprKind::If { cond, thn, els, .. } => {
            f.write_str("if ")?;
            write_expr(cond, Prec::Top, f)?;
            f.write_str(" then ")?;
            write_expr(thn, Prec::Top, f)?;
            f.write_str(" else ")?;
            write_expr(els, Prec::Top, f)
        }
        ExprKind::Let { var, bound, body } => {
            write!(f, "let {var} = ")?;
            write_expr(bound, Prec::Top, f)?;
            f.write_str(" in ")?;
            write_expr(body, Prec::Top, f)
        }
        ExprKind::Ref { level, init, .. } => {
            write!(f, "ref {level} ")?;
            write_expr(init, Prec::Atom, f)
        }
        ExprKind::Deref { r, .. } => {
            f.write_str("!")?;
            write_expr(r, Prec::Atom, f)
        }
        ExprKind::Assign { lhs, rhs, .. } => {
            write_expr(lhs, Prec::Fun, f)?;
            f.write_str(" := ")?;
            write_expr(rhs, Prec::Top, f)
        }
        ExprKind::Ann { e, ty, .. } => {
            f.write_str("(")?;
            write_expr(e, Prec::Top, f)?;
            write!(f, " : {ty})")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, Prec::Top, f)
    }
}

use thiserror::Error;

use super::{Expr, ExprKind, Span};
use crate::cc::{Const, Ctx};
use crate::lattice::{Base, LType, Label, Level, RawType};

/// Name of the free variable bound to the secret input.
pub const INPUT: &str = "input";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("type error ({rule}) at {}..{}: {message}", span.start, span.end)]
pub struct TypeError {
    pub rule: &'static str,
    pub message: String,
    pub span: Span,
}

/// Side conditions of the typing rules, shared with cast insertion.
pub mod rules {
    use super::*;

    pub struct App {
        pub dom: LType,
        pub pc: Label,
        pub cod: LType,
        pub top: Label,
        pub result: LType,
    }

    pub fn app(g: Label, fun: &LType, arg: &LType) -> Result<App, String> {
        let RawType::Fun(dom, pc, cod) = &fun.raw else {
            return Err(format!("applying a term of non-function type {fun}"));
        };
        if !arg.consistent_leq(dom) {
            return Err(format!("argument of type {arg} is not consistent with {dom}"));
        }
        if !g.consistent_leq(*pc) {
            return Err(format!("calling a function with PC label {pc} under PC {g}"));
        }
        if !fun.label.consistent_leq(*pc) {
            return Err(format!("calling a {} function whose PC label is {pc}", fun.label));
        }
        Ok(App { dom: (**dom).clone(), pc: *pc, cod: (**cod).clone(), top: fun.label, result: cod.stamp(fun.label) })
    }

    pub fn cond(cond: &LType) -> Result<Label, String> {
        match cond.raw {
            RawType::Base(Base::Bool) => Ok(cond.label),
            _ => Err(format!("condition has type {cond}")),
        }
    }

    /// Join of the branch types and the type of the conditional.
    pub fn branches(g1: Label, a: &LType, b: &LType) -> Result<(LType, LType), String> {
        let c = a.consistent_join(b).ok_or_else(|| format!("branches of types {a} and {b} have no join"))?;
        let result = c.stamp(g1);
        Ok((c, result))
    }

    pub fn reference(g: Label, l: Level, init: &LType) -> Result<LType, String> {
        let cell = init.with_label(l);
        if !init.consistent_leq(&cell) {
            return Err(format!("initializer of type {init} cannot be stored in a {l} cell"));
        }
        if !g.consistent_leq(l.into()) {
            return Err(format!("allocating a {l} cell under PC {g}"));
        }
        Ok(RawType::reference(cell).at(Level::Low))
    }

    pub fn deref(r: &LType) -> Result<(LType, LType), String> {
        let RawType::Ref(inner) = &r.raw else {
            return Err(format!("dereferencing a term of type {r}"));
        };
        Ok(((**inner).clone(), inner.stamp(r.label)))
    }

    /// Returns the cell type `T_ĝ`.
    pub fn assign(g: Label, r: &LType, v: &LType) -> Result<LType, String> {
        let RawType::Ref(cell) = &r.raw else {
            return Err(format!("assigning through a term of type {r}"));
        };
        if !v.consistent_leq(cell) {
            return Err(format!("value of type {v} cannot be stored in {cell}"));
        }
        if !g.consistent_leq(cell.label) {
            return Err(format!("writing a {} cell under PC {g}", cell.label));
        }
        if !r.label.consistent_leq(cell.label) {
            return Err(format!("writing a {} cell through a {} reference", cell.label, r.label));
        }
        Ok((**cell).clone())
    }

    pub fn ann(from: &LType, to: &LType) -> Result<(), String> {
        if from.consistent_leq(to) {
            Ok(())
        } else {
            Err(format!("{from} is not consistent with {to}"))
        }
    }
}

fn fail<T>(e: &Expr, rule: &'static str, message: String) -> Result<T, TypeError> {
    Err(TypeError { rule, message, span: e.span })
}

/// Synthesizes the type of `e` under context `ctx` and PC `g`.
pub fn infer(ctx: &Ctx, g: Label, e: &Expr) -> Result<LType, TypeError> {
    match &e.kind {
        ExprKind::Var(x) => match ctx.lookup(x) {
            Some(t) => Ok(t.clone()),
            None => fail(e, "var", format!("unbound variable {x}")),
        },
        ExprKind::Const(k, l) => Ok(match k {
            Const::Unit => LType::unit(*l),
            Const::Bool(_) => LType::bool(*l),
        }),
        ExprKind::Lam { pc, var, ann, body, level } => {
            let b = infer(&ctx.with(var, ann.clone()), *pc, body)?;
            Ok(RawType::fun(ann.clone(), *pc, b).at(*level))
        }
        ExprKind::App { fun, arg, .. } => {
            let f = infer(ctx, g, fun)?;
            let a = infer(ctx, g, arg)?;
            rules::app(g, &f, &a).map(|r| r.result).or_else(|m| fail(e, "app", m))
        }
        ExprKind::If { cond, thn, els, .. } => {
            let c = infer(ctx, g, cond)?;
            let g1 = rules::cond(&c).or_else(|m| fail(e, "if", m))?;
            let inner = g.consistent_join(g1);
            let a = infer(ctx, inner, thn)?;
            let b = infer(ctx, inner, els)?;
            rules::branches(g1, &a, &b).map(|r| r.1).or_else(|m| fail(e, "if", m))
        }
        ExprKind::Let { var, bound, body } => {
            let a = infer(ctx, g, bound)?;
            infer(&ctx.with(var, a), g, body)
        }
        ExprKind::Ref { level, init, .. } => {
            let t = infer(ctx, g, init)?;
            rules::reference(g, *level, &t).or_else(|m| fail(e, "ref", m))
        }
        ExprKind::Deref { r, .. } => {
            let t = infer(ctx, g, r)?;
            rules::deref(&t).map(|r| r.1).or_else(|m| fail(e, "deref", m))
        }
        ExprKind::Assign { lhs, rhs, .. } => {
            let l = infer(ctx, g, lhs)?;
            let r = infer(ctx, g, rhs)?;
            rules::assign(g, &l, &r).or_else(|m| fail(e, "assign", m))?;
            Ok(LType::unit(Level::Low))
        }
        ExprKind::Ann { e: inner, ty, .. } => {
            let t = infer(ctx, g, inner)?;
            rules::ann(&t, ty).or_else(|m| fail(e, "ann", m))?;
            Ok(ty.clone())
        }
    }
}

/// The context of a whole program: the secret input only.
pub fn program_ctx() -> Ctx {
    Ctx::new().with(INPUT, LType::bool(Level::High))
}

/// Types a whole program under PC `low`.
pub fn check_program(e: &Expr) -> Result<LType, TypeError> {
    infer(&program_ctx(), Label::LOW, e)
}

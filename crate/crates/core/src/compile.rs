//! Cast insertion: translates well-typed surface terms into the cast calculus.
//!
//! Each construct compiles to its static form when the labels that its typing
//! rule inspects are known, and to its checked form (`app*`, `if*`, `ref?`,
//! `!*`, `:=?`) otherwise.

use crate::cc::{Ctx, Term};
use crate::coercion::BlameLabel;
use crate::lattice::{LType, Label, RawType};
use crate::surface::{program_ctx, rules, Expr, ExprKind, TypeError};
use crate::vcoercion::coerce;

fn cast(m: Term, from: &LType, to: &LType, p: BlameLabel) -> Term {
    if from == to {
        m
    } else {
        Term::Cast(Box::new(m), coerce(from, to, p))
    }
}

fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

fn fail<T>(e: &Expr, rule: &'static str, message: String) -> Result<T, TypeError> {
    Err(TypeError { rule, message, span: e.span })
}

/// Compiles `e` under context `ctx` and PC `g`, returning the term and its type.
pub fn compile(ctx: &Ctx, g: Label, e: &Expr) -> Result<(Term, LType), TypeError> {
    match &e.kind {
        ExprKind::Var(x) => match ctx.lookup(x) {
            Some(t) => Ok((Term::Var(x.clone()), t.clone())),
            None => fail(e, "var", format!("unbound variable {x}")),
        },
        ExprKind::Const(k, l) => {
            let raw = match k {
                crate::cc::Const::Unit => RawType::unit(),
                crate::cc::Const::Bool(_) => RawType::bool(),
            };
            Ok((Term::Const(*k), raw.at(*l)))
        }
        ExprKind::Lam { pc, var, ann, body, level } => {
            let (n, b) = compile(&ctx.with(var, ann.clone()), *pc, body)?;
            Ok((Term::Lam(var.clone(), bx(n)), RawType::fun(ann.clone(), *pc, b).at(*level)))
        }
        ExprKind::App { fun, arg, blame } => {
            let (l, tf) = compile(ctx, g, fun)?;
            let (m, ta) = compile(ctx, g, arg)?;
            let info = rules::app(g, &tf, &ta).or_else(|msg| fail(e, "app", msg))?;
            let m = cast(m, &ta, &info.dom, *blame);
            match (g.level(), tf.label.level()) {
                (Some(amb), Some(top)) => {
                    let target = RawType::fun(info.dom.clone(), amb.join(top).into(), info.cod.clone()).at(top);
                    let l = cast(l, &tf, &target, *blame);
                    let t = Term::App { fun: bx(l), arg: bx(m), dom: info.dom, cod: info.cod, level: top };
                    Ok((t, info.result))
                }
                _ => {
                    let cod = info.cod.raw.clone();
                    let target =
                        RawType::fun(info.dom.clone(), Label::Star, cod.clone().at(Label::Star)).at(Label::Star);
                    let l = cast(l, &tf, &target, *blame);
                    let t = Term::AppStar { fun: bx(l), arg: bx(m), dom: info.dom, cod: cod.clone() };
                    Ok((cast(t, &cod.at(Label::Star), &info.result, *blame), info.result))
                }
            }
        }
        ExprKind::If { cond, thn, els, blame } => {
            let (l, tc) = compile(ctx, g, cond)?;
            let g1 = rules::cond(&tc).or_else(|msg| fail(e, "if", msg))?;
            let inner = g.consistent_join(g1);
            let (m, ta) = compile(ctx, inner, thn)?;
            let (n, tb) = compile(ctx, inner, els)?;
            let (c, result) = rules::branches(g1, &ta, &tb).or_else(|msg| fail(e, "if", msg))?;
            match (g.level(), g1.level()) {
                (Some(_), Some(level)) => {
                    let m = cast(m, &ta, &c, *blame);
                    let n = cast(n, &tb, &c, *blame);
                    Ok((Term::If { cond: bx(l), thn: bx(m), els: bx(n), ty: c, level }, result))
                }
                _ => {
                    let star = c.with_label(Label::Star);
                    let l = cast(l, &tc, &LType::bool(Label::Star), *blame);
                    let m = cast(m, &ta, &star, *blame);
                    let n = cast(n, &tb, &star, *blame);
                    let t = Term::IfStar { cond: bx(l), thn: bx(m), els: bx(n), raw: c.raw.clone() };
                    Ok((cast(t, &star, &result, *blame), result))
                }
            }
        }
        ExprKind::Let { var, bound, body } => {
            let (m, a) = compile(ctx, g, bound)?;
            let (n, b) = compile(&ctx.with(var, a.clone()), g, body)?;
            Ok((Term::Let { var: var.clone(), bound: bx(m), ty: a, body: bx(n) }, b))
        }
        ExprKind::Ref { level, init, blame } => {
            let (m, t) = compile(ctx, g, init)?;
            let result = rules::reference(g, *level, &t).or_else(|msg| fail(e, "ref", msg))?;
            let m = cast(m, &t, &t.with_label(*level), *blame);
            let raw = t.raw.clone();
            let term = if g.level().is_some() {
                Term::Ref { level: *level, raw, init: bx(m) }
            } else {
                Term::RefStar { blame: *blame, level: *level, raw, init: bx(m) }
            };
            Ok((term, result))
        }
        ExprKind::Deref { r, blame } => {
            let (m, t) = compile(ctx, g, r)?;
            let (a, result) = rules::deref(&t).or_else(|msg| fail(e, "deref", msg))?;
            match t.label.level() {
                Some(level) => Ok((Term::Deref { r: bx(m), ty: a, level }, result)),
                None => {
                    let target = RawType::reference(a.with_label(Label::Star)).at(Label::Star);
                    let m = cast(m, &t, &target, *blame);
                    Ok((Term::DerefStar { r: bx(m), raw: a.raw.clone() }, result))
                }
            }
        }
        ExprKind::Assign { lhs, rhs, blame } => {
            let (l, tl) = compile(ctx, g, lhs)?;
            let (m, tm) = compile(ctx, g, rhs)?;
            let cell = rules::assign(g, &tl, &tm).or_else(|msg| fail(e, "assign", msg))?;
            let m = cast(m, &tm, &cell, *blame);
            let raw = cell.raw.clone();
            let term = match (g.level(), tl.label.level(), cell.label.level()) {
                (Some(_), Some(level), Some(c)) => Term::Assign { lhs: bx(l), rhs: bx(m), raw, cell: c, level },
                _ => {
                    let target = RawType::reference(cell.clone()).at(Label::Star);
                    let l = cast(l, &tl, &target, *blame);
                    Term::AssignStar { blame: *blame, lhs: bx(l), rhs: bx(m), raw, cell: cell.label }
                }
            };
            Ok((term, LType::unit(crate::lattice::Level::Low)))
        }
        ExprKind::Ann { e: inner, ty, blame } => {
            let (m, t) = compile(ctx, g, inner)?;
            rules::ann(&t, ty).or_else(|msg| fail(e, "ann", msg))?;
            Ok((cast(m, &t, ty, *blame), ty.clone()))
        }
    }
}

/// Compiles a whole program under PC `low` with the secret input in scope.
pub fn compile_program(e: &Expr) -> Result<(Term, LType), TypeError> {
    compile(&program_ctx(), Label::LOW, e)
}

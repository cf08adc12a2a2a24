//! Small-step reduction of cast calculus configurations `M | μ | PC`.

use std::fmt;

use super::typing::{check, check_heap, Ctx};
use super::{Const, Heap, HeapTyping, RawValue, Term, Value};
use crate::coercion::{coerce_label, BlameLabel};
use crate::lattice::{LType, Label, Level};
use crate::pc::Pc;
use crate::vcoercion::{apply_cast, stamp_val, RawCoercion, VCoercion};

/// Deliberately broken rules, used to check that the fuzzers can find bugs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mutation {
    #[default]
    None,
    /// `prot` returns its value without stamping it.
    ProtValNoStamp,
    /// `if*` runs the branch without raising the PC or stamping the result.
    IfStarNoStamp,
    /// `if*` blames whenever the condition is high.
    IfStarBlamesHigh,
    /// `:=?` skips its PC check.
    AssignStarNoCheck,
}

impl Mutation {
    pub const ALL: [Mutation; 4] =
        [Mutation::ProtValNoStamp, Mutation::IfStarNoStamp, Mutation::IfStarBlamesHigh, Mutation::AssignStarNoCheck];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::None => "none",
            Mutation::ProtValNoStamp => "prot-val-no-stamp",
            Mutation::IfStarNoStamp => "if-star-no-stamp",
            Mutation::IfStarBlamesHigh => "if-star-blames-high",
            Mutation::AssignStarNoCheck => "assign-star-no-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Mutation> {
        std::iter::once(Mutation::None).chain(Mutation::ALL).find(|m| m.name() == s)
    }
}

#[derive(Clone, Debug)]
pub struct MachineConfig {
    pub fuel: usize,
    pub trace: bool,
    /// Re-check typing of the configuration after every step.
    pub preserve: bool,
    pub mutation: Mutation,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig { fuel: 100_000, trace: false, preserve: false, mutation: Mutation::None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Value),
    Blame(BlameLabel),
    /// A non-value, non-blame term with no applicable rule.
    Stuck(String),
    /// A step produced an ill-typed configuration.
    PreservationFail(String),
    Timeout,
}

impl Outcome {
    pub fn is_value(&self) -> bool {
        matches!(self, Outcome::Value(_))
    }
}

#[derive(Clone, Debug)]
pub struct TraceLine {
    pub index: usize,
    pub rule: &'static str,
    pub redex: String,
    pub pc: String,
    pub heap_size: usize,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>5} {:<16} pc={} heap={} {}", self.index, self.rule, self.pc, self.heap_size, self.redex)
    }
}

/// The result of running a program.
#[derive(Clone, Debug)]
pub struct Run {
    pub outcome: Outcome,
    pub steps: usize,
    pub heap: Heap,
    pub trace: Vec<TraceLine>,
}

/// The reduction machine.
pub struct Machine {
    pub config: MachineConfig,
    heap: Heap,
    sigma: HeapTyping,
    redex: Option<(String, String)>,
}

type Step = Result<(Term, &'static str), String>;

fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

impl Machine {
    pub fn new(config: MachineConfig) -> Machine {
        Machine { config, heap: Heap::default(), sigma: HeapTyping::new(), redex: None }
    }

    /// Runs a closed term of type `ty` from PC `low` and an empty heap.
    pub fn run(mut self, term: Term, ty: &LType) -> Run {
        let pc = Pc::low();
        let mut m = term;
        let mut trace = vec![];
        let mut steps = 0;
        if self.config.preserve {
            if let Err(e) = check(&Ctx::new(), &self.sigma, Label::LOW, Level::Low, &m, ty) {
                return self.finish(Outcome::PreservationFail(format!("initial term: {e}")), steps, trace);
            }
        }
        loop {
            if let Term::Blame(p) = m {
                return self.finish(Outcome::Blame(p), steps, trace);
            }
            if let Some(v) = m.as_value() {
                return self.finish(Outcome::Value(v), steps, trace);
            }
            if steps >= self.config.fuel {
                return self.finish(Outcome::Timeout, steps, trace);
            }
            let (next, rule) = match self.step(m, &pc) {
                Ok(r) => r,
                Err(msg) => return self.finish(Outcome::Stuck(msg), steps, trace),
            };
            steps += 1;
            if self.config.trace {
                let (redex, inner_pc) = self.redex.take().unwrap_or_default();
                trace.push(TraceLine { index: steps, rule, redex, pc: inner_pc, heap_size: self.heap.len() });
            }
            if self.config.preserve {
                let r = check(&Ctx::new(), &self.sigma, Label::LOW, Level::Low, &next, ty)
                    .and_then(|_| check_heap(&self.sigma, &self.heap));
                if let Err(e) = r {
                    return self.finish(Outcome::PreservationFail(format!("after {rule}: {e}")), steps, trace);
                }
            }
            m = next;
        }
    }

    fn finish(self, outcome: Outcome, steps: usize, trace: Vec<TraceLine>) -> Run {
        Run { outcome, steps, heap: self.heap, trace }
    }

    fn fired(&mut self, redex: impl FnOnce() -> String, pc: &Pc) {
        if self.config.trace {
            self.redex = Some((redex(), pc.to_string()));
        }
    }

    /// Steps `inner`, or propagates blame, and rebuilds the surrounding frame.
    fn under(&mut self, inner: Term, pc: &Pc, rebuild: impl FnOnce(Term) -> Term) -> Step {
        if let Term::Blame(p) = inner {
            self.fired(|| format!("(blame {p}) in a frame"), pc);
            return Ok((Term::Blame(p), "xi-blame"));
        }
        let (n, rule) = self.step(inner, pc)?;
        Ok((rebuild(n), rule))
    }

    fn read(&self, v: &Value) -> Result<(super::Addr, Value), String> {
        let RawValue::Addr(a) = v.raw else { return Err("dereferencing a non-address".into()) };
        let stored = self.heap.get(a).ok_or("dangling address")?.clone();
        Ok((a, stored))
    }

    fn write(&mut self, v: &Value, w: Value) -> Result<(), String> {
        let RawValue::Addr(a) = v.raw else { return Err("assigning through a non-address".into()) };
        if self.heap.set(a, w) {
            Ok(())
        } else {
            Err("dangling address".into())
        }
    }

    fn step(&mut self, m: Term, pc: &Pc) -> Step {
        let shown = if self.config.trace { Some(m.to_string()) } else { None };
        let fire = |this: &mut Self| this.fired(|| shown.clone().unwrap_or_default(), pc);
        match m {
            Term::App { fun, arg, dom, cod, level } => {
                if !fun.is_value() {
                    return self.under(*fun, pc, |f| Term::App { fun: bx(f), arg, dom, cod, level });
                }
                if !arg.is_value() {
                    return self.under(*arg, pc, |a| Term::App { fun, arg: bx(a), dom, cod, level });
                }
                fire(self);
                let (f, v) = (fun.as_value().unwrap(), arg.as_value().unwrap());
                let RawValue::Lam(x, body) = f.raw else { return Err("applying a non-function".into()) };
                match f.wrap {
                    None => Ok((
                        Term::Prot { pc: pc.stamp(level), level, body: bx(body.subst(&x, &v.to_term())), ty: cod },
                        "beta",
                    )),
                    Some(VCoercion { raw: RawCoercion::Fun(dbar, c, d), .. }) => {
                        let pc1 = match pc.stamp(level).cast(&dbar) {
                            Ok(p) => p,
                            Err(p) => return Ok((Term::Blame(p), "app-blame-pc")),
                        };
                        let w = match apply_cast(&v, &c) {
                            Ok(w) => w,
                            Err(p) => return Ok((Term::Blame(p), "app-blame")),
                        };
                        let body = Term::Cast(bx(body.subst(&x, &w.to_term())), *d);
                        Ok((Term::Prot { pc: pc1, level, body: bx(body), ty: cod }, "app-cast"))
                    }
                    Some(_) => Err("function wrapped in a non-function coercion".into()),
                }
            }
            Term::AppStar { fun, arg, dom, cod } => {
                if !fun.is_value() {
                    return self.under(*fun, pc, |f| Term::AppStar { fun: bx(f), arg, dom, cod });
                }
                if !arg.is_value() {
                    return self.under(*arg, pc, |a| Term::AppStar { fun, arg: bx(a), dom, cod });
                }
                fire(self);
                let (f, v) = (fun.as_value().unwrap(), arg.as_value().unwrap());
                let (RawValue::Lam(x, body), Some(VCoercion { raw: RawCoercion::Fun(dbar, c, d), seq })) =
                    (f.raw, f.wrap)
                else {
                    return Err("dynamic application of an unwrapped function".into());
                };
                let l = seq.security();
                let pc1 = match pc.stamp_bang(l).cast(&dbar) {
                    Ok(p) => p,
                    Err(p) => return Ok((Term::Blame(p), "app*-blame-pc")),
                };
                let w = match apply_cast(&v, &c) {
                    Ok(w) => w,
                    Err(p) => return Ok((Term::Blame(p), "app*-blame")),
                };
                let body = Term::Cast(bx(body.subst(&x, &w.to_term())), *d);
                Ok((Term::Prot { pc: pc1, level: l, body: bx(body), ty: cod.at(Label::Star) }, "app*-cast"))
            }
            Term::If { cond, thn, els, ty, level } => {
                if !cond.is_value() {
                    return self.under(*cond, pc, |c| Term::If { cond: bx(c), thn, els, ty, level });
                }
                fire(self);
                let v = cond.as_value().unwrap();
                let RawValue::Const(Const::Bool(b)) = v.raw else { return Err("branching on a non-boolean".into()) };
                let rule = match (b, v.wrap.is_some()) {
                    (true, false) => "if-true",
                    (false, false) => "if-false",
                    (true, true) => "if-true-cast",
                    (false, true) => "if-false-cast",
                };
                let branch = if b { thn } else { els };
                Ok((Term::Prot { pc: pc.stamp(level), level, body: branch, ty }, rule))
            }
            Term::IfStar { cond, thn, els, raw } => {
                if !cond.is_value() {
                    return self.under(*cond, pc, |c| Term::IfStar { cond: bx(c), thn, els, raw });
                }
                fire(self);
                let v = cond.as_value().unwrap();
                let (RawValue::Const(Const::Bool(b)), Some(c)) = (v.raw, v.wrap) else {
                    return Err("dynamic branch on an unwrapped value".into());
                };
                let l = c.seq.security();
                let branch = if b { thn } else { els };
                let rule = if b { "if*-true-cast" } else { "if*-false-cast" };
                let ty = raw.at(Label::Star);
                match self.config.mutation {
                    Mutation::IfStarBlamesHigh if l == Level::High => {
                        return Ok((Term::Blame(BlameLabel(0)), rule));
                    }
                    Mutation::IfStarNoStamp => {
                        return Ok((
                            Term::Prot { pc: pc.stamp_bang(Level::Low), level: Level::Low, body: branch, ty },
                            rule,
                        ));
                    }
                    _ => {}
                }
                Ok((Term::Prot { pc: pc.stamp_bang(l), level: l, body: branch, ty }, rule))
            }
            Term::Let { var, bound, ty, body } => {
                if !bound.is_value() {
                    return self.under(*bound, pc, |b| Term::Let { var, bound: bx(b), ty, body });
                }
                fire(self);
                Ok((body.subst(&var, &bound), "let"))
            }
            Term::Ref { level, raw, init } => {
                if !init.is_value() {
                    return self.under(*init, pc, |i| Term::Ref { level, raw, init: bx(i) });
                }
                fire(self);
                let a = self.heap.alloc(level, init.as_value().unwrap());
                self.sigma.insert(a, raw);
                Ok((Term::Addr(a), "ref"))
            }
            Term::RefStar { blame, level, raw, init } => {
                if !init.is_value() {
                    return self.under(*init, pc, |i| Term::RefStar { blame, level, raw, init: bx(i) });
                }
                fire(self);
                if pc.label() != Label::Star {
                    return Err("checked allocation under a PC that is not *".into());
                }
                if let Err(p) = pc.cast(&coerce_label(Label::Star, level.into(), blame)) {
                    return Ok((Term::Blame(p), "ref?-blame"));
                }
                let a = self.heap.alloc(level, init.as_value().unwrap());
                self.sigma.insert(a, raw);
                Ok((Term::Addr(a), "ref?"))
            }
            Term::Deref { r, ty, level } => {
                if !r.is_value() {
                    return self.under(*r, pc, |r| Term::Deref { r: bx(r), ty, level });
                }
                fire(self);
                let v = r.as_value().unwrap();
                let (_, stored) = self.read(&v)?;
                match v.wrap {
                    None => Ok((Term::Prot { pc: pc.stamp(level), level, body: bx(stored.to_term()), ty }, "deref")),
                    Some(VCoercion { raw: RawCoercion::Ref(_, d), .. }) => {
                        let body = Term::Cast(bx(stored.to_term()), *d);
                        Ok((Term::Prot { pc: pc.stamp(level), level, body: bx(body), ty }, "deref-cast"))
                    }
                    Some(_) => Err("address wrapped in a non-reference coercion".into()),
                }
            }
            Term::DerefStar { r, raw } => {
                if !r.is_value() {
                    return self.under(*r, pc, |r| Term::DerefStar { r: bx(r), raw });
                }
                fire(self);
                let v = r.as_value().unwrap();
                let (_, stored) = self.read(&v)?;
                let Some(VCoercion { raw: RawCoercion::Ref(_, d), seq }) = v.wrap else {
                    return Err("dynamic dereference of an unwrapped address".into());
                };
                let l = seq.security();
                let body = Term::Cast(bx(stored.to_term()), *d);
                Ok((
                    Term::Prot { pc: pc.stamp_bang(l), level: l, body: bx(body), ty: raw.at(Label::Star) },
                    "deref*-cast",
                ))
            }
            Term::Assign { lhs, rhs, raw, cell, level } => {
                if !lhs.is_value() {
                    return self.under(*lhs, pc, |l| Term::Assign { lhs: bx(l), rhs, raw, cell, level });
                }
                if !rhs.is_value() {
                    return self.under(*rhs, pc, |r| Term::Assign { lhs, rhs: bx(r), raw, cell, level });
                }
                fire(self);
                let (lv, v) = (lhs.as_value().unwrap(), rhs.as_value().unwrap());
                match &lv.wrap {
                    None => {
                        self.write(&lv, v)?;
                        Ok((Term::Const(Const::Unit), "assign"))
                    }
                    Some(VCoercion { raw: RawCoercion::Ref(c, _), .. }) => {
                        let w = match apply_cast(&v, c) {
                            Ok(w) => w,
                            Err(p) => return Ok((Term::Blame(p), "assign-blame")),
                        };
                        self.write(&lv, w)?;
                        Ok((Term::Const(Const::Unit), "assign-cast"))
                    }
                    Some(_) => Err("address wrapped in a non-reference coercion".into()),
                }
            }
            Term::AssignStar { blame, lhs, rhs, raw, cell } => {
                if !lhs.is_value() {
                    return self.under(*lhs, pc, |l| Term::AssignStar { blame, lhs: bx(l), rhs, raw, cell });
                }
                if !rhs.is_value() {
                    return self.under(*rhs, pc, |r| Term::AssignStar { blame, lhs, rhs: bx(r), raw, cell });
                }
                fire(self);
                let (lv, v) = (lhs.as_value().unwrap(), rhs.as_value().unwrap());
                let (RawValue::Addr(a), Some(VCoercion { raw: RawCoercion::Ref(c, _), seq })) = (&lv.raw, &lv.wrap)
                else {
                    return Err("checked assignment through an unwrapped address".into());
                };
                if self.config.mutation != Mutation::AssignStarNoCheck {
                    let check = coerce_label(Label::Star, a.level.into(), blame);
                    if let Err(p) = pc.stamp_bang(seq.security()).cast(&check) {
                        return Ok((Term::Blame(p), "assign?-blame-pc"));
                    }
                }
                let w = match apply_cast(&v, c) {
                    Ok(w) => w,
                    Err(p) => return Ok((Term::Blame(p), "assign?-blame")),
                };
                self.write(&lv, w)?;
                Ok((Term::Const(Const::Unit), "assign?-cast"))
            }
            Term::Prot { pc: inner, level, body, ty } => {
                if let Term::Blame(p) = *body {
                    fire(self);
                    return Ok((Term::Blame(p), "prot-blame"));
                }
                if let Some(v) = body.as_value() {
                    fire(self);
                    if self.config.mutation == Mutation::ProtValNoStamp {
                        return Ok((v.to_term(), "prot-val"));
                    }
                    return Ok((stamp_val(&v, &ty, level).to_term(), "prot-val"));
                }
                let (n, rule) = self.step(*body, &inner)?;
                Ok((Term::Prot { pc: inner, level, body: bx(n), ty }, rule))
            }
            Term::Cast(inner, c) => {
                if !inner.is_value() {
                    return self.under(*inner, pc, |i| Term::Cast(bx(i), c));
                }
                fire(self);
                match apply_cast(&inner.as_value().unwrap(), &c) {
                    Ok(v) => Ok((v.to_term(), "cast")),
                    Err(p) => Ok((Term::Blame(p), "cast-blame")),
                }
            }
            Term::Var(x) => Err(format!("free variable {x}")),
            Term::Blame(_) | Term::Const(_) | Term::Addr(_) | Term::Lam(..) => Err("no rule applies".into()),
        }
    }
}

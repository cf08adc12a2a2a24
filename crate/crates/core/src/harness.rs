//! Random testing of the metatheory: a type-directed program generator,
//! annotation erosion, and fuzz suites for type safety, noninterference and
//! the gradual guarantee.
//!
//! Every case is generated from its own random stream derived from
//! `(seed, index)`, so any case can be regenerated on its own with
//! [`generate`]. Cases are checked in parallel and the per-case reports are
//! combined with [`Report::merge`], which is associative.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cc::{self, Ctx, HeapTyping, MachineConfig, Mutation, Outcome, RawValue, Run, Term};
use crate::coercion::Seq;
use crate::dynsec::{self, DOutcome, DRaw};
use crate::lattice::{Base, LType, Label, Level, RawType};
use crate::pipeline::Compiled;
use crate::surface::build;
use crate::surface::{check_program, erode_site, infer, label_sites, program_ctx, Expr, INPUT};

#[derive(Clone, Debug, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    pub max_depth: usize,
    /// Generate `ref`, `!` and `:=`.
    pub heap_ops: bool,
    /// Probability of `*` at each generated label site.
    pub star_bias: f64,
    pub mutation: Mutation,
    /// Step budget for each machine run.
    pub fuel: usize,
    /// Minimize counterexamples.
    pub shrink: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 1,
            count: 100,
            max_depth: 6,
            heap_ops: true,
            star_bias: 0.4,
            mutation: Mutation::None,
            fuel: 20_000,
            shrink: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Safety,
    Ni,
    Gg,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Safety => "safety",
            Suite::Ni => "ni",
            Suite::Gg => "gg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationKind {
    Stuck,
    PreservationFail,
    /// Cast insertion produced an ill-typed term or changed the type.
    CompileFail,
    NIFail,
    SimFail,
    GGFail,
    StaticGGFail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub seed: u64,
    pub index: usize,
    pub program: String,
    /// The less precise program of a gradual guarantee pair.
    pub eroded: Option<String>,
    pub detail: String,
    pub shrunk: String,
    pub shrunk_eroded: Option<String>,
}

/// A generated test case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Case {
    Program(Expr),
    /// A program and an erosion of it, `eroded ⊑ precise`.
    Pair {
        precise: Expr,
        eroded: Expr,
    },
}

impl Case {
    fn exprs(&self) -> Vec<&Expr> {
        match self {
            Case::Program(e) => vec![e],
            Case::Pair { precise, eroded } => vec![precise, eroded],
        }
    }
}

// ---------------------------------------------------------------------------
// Generation

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GenConfig,
    fresh: usize,
}

#[derive(Clone, Copy)]
enum Prod {
    Leaf,
    If,
    Let,
    App,
    Ann,
    Deref,
    Assign,
}

fn fits(ctx: &Ctx, pc: Label, e: &Expr, goal: &LType) -> bool {
    infer(ctx, pc, e).is_ok_and(|t| t.consistent_leq(goal))
}

/// The labels `l` with `l ≲ bound`, as levels.
fn levels_below(bound: Label) -> &'static [Level] {
    match bound {
        Label::Known(Level::Low) => &[Level::Low],
        _ => &[Level::Low, Level::High],
    }
}

impl<'a> Gen<'a> {
    fn new(cfg: &'a GenConfig, index: usize) -> Gen<'a> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        Gen { rng, cfg, fresh: 0 }
    }

    fn level(&mut self) -> Level {
        if self.rng.gen_bool(0.5) {
            Level::Low
        } else {
            Level::High
        }
    }

    fn label(&mut self) -> Label {
        if self.rng.gen_bool(self.cfg.star_bias) {
            Label::Star
        } else {
            self.level().into()
        }
    }

    fn level_below(&mut self, bound: Label) -> Level {
        *levels_below(bound).choose(&mut self.rng).unwrap()
    }

    /// A label `l` with `l ≲ bound`.
    fn label_below(&mut self, bound: Label) -> Label {
        let l = self.label();
        if l.consistent_leq(bound) {
            l
        } else {
            bound
        }
    }

    /// A label `l` with `lower ≲ l`.
    fn label_above(&mut self, lower: Label) -> Label {
        let l = self.label();
        if lower.consistent_leq(l) {
            l
        } else {
            lower
        }
    }

    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("x{}", self.fresh)
    }

    fn base_type(&mut self) -> LType {
        let b = if self.rng.gen_bool(0.7) { RawType::bool() } else { RawType::unit() };
        b.at(self.label())
    }

    fn small_type(&mut self) -> LType {
        let r = self.rng.gen_range(0..10);
        if r < 6 || (!self.cfg.heap_ops && r < 8) {
            self.base_type()
        } else if r < 8 {
            let inner = self.base_type();
            RawType::reference(inner).at(self.label())
        } else {
            let (a, pc, b) = (self.base_type(), self.label(), self.base_type());
            RawType::fun(a, pc, b).at(self.label())
        }
    }

    /// Replaces labels of `t` by `*` with probability `star_bias` each.
    fn erode_type(&mut self, t: &LType) -> LType {
        let mut t = t.clone();
        for i in 0..t.label_count() {
            if self.rng.gen_bool(self.cfg.star_bias) {
                t = t.replace_label(i, Label::Star);
            }
        }
        t
    }

    fn gen(&mut self, ctx: &Ctx, pc: Label, goal: &LType, depth: usize) -> Option<Expr> {
        if depth > 0 {
            let mut prods = vec![(Prod::Leaf, 2), (Prod::If, 3), (Prod::Let, 3), (Prod::App, 3), (Prod::Ann, 2)];
            if self.cfg.heap_ops {
                prods.push((Prod::Deref, 2));
                if goal.raw == RawType::unit() {
                    prods.push((Prod::Assign, 4));
                }
            }
            for _ in 0..3 {
                let p = prods.choose_weighted(&mut self.rng, |x| x.1).unwrap().0;
                if let Some(e) = self.production(p, ctx, pc, goal, depth - 1) {
                    if fits(ctx, pc, &e, goal) {
                        return Some(e);
                    }
                }
            }
        }
        self.leaf(ctx, pc, goal, depth)
    }

    fn production(&mut self, p: Prod, ctx: &Ctx, pc: Label, goal: &LType, d: usize) -> Option<Expr> {
        match p {
            Prod::Leaf => self.leaf(ctx, pc, goal, d),
            Prod::If => {
                let gc = self.label_below(goal.label);
                let cond = self.gen(ctx, pc, &LType::bool(gc), d)?;
                let inner = pc.consistent_join(gc);
                let thn = self.gen(ctx, inner, goal, d)?;
                let els = self.gen(ctx, inner, goal, d)?;
                Some(build::ite(cond, thn, els))
            }
            Prod::Let => {
                let s = self.small_type();
                let bound = self.gen(ctx, pc, &s, d)?;
                let t = infer(ctx, pc, &bound).ok()?;
                let x = self.var();
                let body = self.gen(&ctx.with(&x, t), pc, goal, d)?;
                Some(build::let_in(&x, bound, body))
            }
            Prod::App => {
                let s = self.small_type();
                let top = self.level_below(goal.label);
                let fpc = self.label_above(pc.consistent_join(top.into()));
                let fun = if self.rng.gen_bool(0.6) {
                    let x = self.var();
                    let dom = self.erode_type(&s);
                    let body = self.gen(&ctx.with(&x, dom.clone()), fpc, goal, d)?;
                    build::lam(fpc, &x, dom, body, top)
                } else {
                    let ft = RawType::fun(s.clone(), fpc, goal.clone()).at(top);
                    self.gen(ctx, pc, &ft, d)?
                };
                let arg = self.gen(ctx, pc, &s, d)?;
                Some(build::app(fun, arg))
            }
            Prod::Ann => {
                let t = self.erode_type(goal);
                let e = self.gen(ctx, pc, &t, d)?;
                Some(build::ann(e, t))
            }
            Prod::Deref => {
                let cell = self.label_below(goal.label);
                let top = self.label_below(goal.label);
                let rt = RawType::reference(goal.raw.clone().at(cell)).at(top);
                Some(build::deref(self.gen(ctx, pc, &rt, d)?))
            }
            Prod::Assign => {
                let top = self.label();
                let cell = self.label_above(pc.consistent_join(top));
                let mut s = self.base_type();
                s.label = cell;
                let lhs = self.gen(ctx, pc, &RawType::reference(s.clone()).at(top), d)?;
                let rhs = self.gen(ctx, pc, &s, d)?;
                Some(build::assign(lhs, rhs))
            }
        }
    }

    fn leaf(&mut self, ctx: &Ctx, pc: Label, goal: &LType, depth: usize) -> Option<Expr> {
        let vars: Vec<&str> = ctx.bindings().filter(|(_, t)| t.consistent_leq(goal)).map(|(x, _)| x).collect();
        let input_ok = vars.contains(&INPUT);
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            let x = if input_ok && self.rng.gen_bool(0.5) { INPUT } else { *vars.choose(&mut self.rng).unwrap() };
            return Some(build::var(x));
        }
        match &goal.raw {
            RawType::Base(b) => {
                let l = self.level_below(goal.label);
                Some(match b {
                    Base::Bool => build::boolean(self.rng.gen_bool(0.5), l),
                    Base::Unit => build::unit(l),
                })
            }
            RawType::Fun(dom, gpc, cod) => {
                let top = self.level_below(goal.label);
                let fpc = self.label_above(gpc.consistent_join(top.into()));
                let fpc = if gpc.consistent_leq(fpc) { fpc } else { *gpc };
                let x = self.var();
                let ann = self.erode_type(dom);
                let body = self.gen(&ctx.with(&x, ann.clone()), fpc, cod, depth.saturating_sub(1))?;
                Some(build::lam(fpc, &x, ann, body, top))
            }
            RawType::Ref(a) => {
                let l = match a.label {
                    Label::Known(l) => l,
                    Label::Star => self.level_below(Label::Star),
                };
                if !pc.consistent_leq(l.into()) {
                    return vars.choose(&mut self.rng).map(|x| build::var(x));
                }
                let cell = a.with_label(l);
                let init = self.gen(ctx, pc, &cell, depth.saturating_sub(1))?;
                let exact = infer(ctx, pc, &init).is_ok_and(|t| t == cell);
                let init = if exact { init } else { build::ann(init, cell) };
                Some(build::reference(l, init))
            }
        }
    }

    /// A closed program of type `goal`.
    fn program(&mut self, goal: &LType) -> Expr {
        let ctx = program_ctx();
        for _ in 0..50 {
            if let Some(e) = self.gen(&ctx, Label::LOW, goal, self.cfg.max_depth) {
                let Ok(t) = check_program(&e) else { continue };
                let mut e = if t == *goal { e } else { build::ann(e, goal.clone()) };
                e.number_blame();
                if check_program(&e).is_ok() {
                    return e;
                }
            }
        }
        // Only reachable for goals no generated term inhabits.
        let mut e = build::ann(build::boolean(false, Level::Low), LType::bool(Level::Low));
        e.number_blame();
        e
    }
}

/// Generates a closed, well-typed program under the given configuration.
pub fn gen_program(cfg: &GenConfig, index: usize, goal: &LType) -> Expr {
    Gen::new(cfg, index).program(goal)
}

/// Replaces `k` distinct labels of `e` that are not already `*`.
/// Returns `None` when `e` has fewer than `k` such sites.
pub fn erode(e: &Expr, k: usize, rng: &mut impl Rng) -> Option<Expr> {
    let mut sites: Vec<usize> = (0..label_sites(e)).filter(|&s| erode_site(e, s) != *e).collect();
    if sites.len() < k {
        return None;
    }
    sites.shuffle(rng);
    Some(sites[..k].iter().fold(e.clone(), |acc, &s| erode_site(&acc, s)))
}

/// Regenerates case `index` of `suite`.
pub fn generate(suite: Suite, cfg: &GenConfig, index: usize) -> Option<Case> {
    let mut g = Gen::new(cfg, index);
    match suite {
        Suite::Safety => {
            let goal = g.small_type();
            Some(Case::Program(g.program(&goal)))
        }
        Suite::Ni => Some(Case::Program(g.program(&LType::bool(Level::Low)))),
        Suite::Gg => {
            for _ in 0..20 {
                let goal = g.base_type();
                let precise = g.program(&goal);
                let k = g.rng.gen_range(1..=3);
                if let Some(eroded) = erode(&precise, k, &mut g.rng).or_else(|| erode(&precise, 1, &mut g.rng)) {
                    return Some(Case::Pair { precise, eroded });
                }
            }
            None
        }
    }
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Default)]
struct Eval {
    violation: Option<(ViolationKind, String)>,
    inconclusive: bool,
    outcomes: Vec<&'static str>,
}

impl Eval {
    fn fail(&mut self, kind: ViolationKind, detail: String) {
        if self.violation.is_none() {
            self.violation = Some((kind, detail));
        }
    }

    fn record(&mut self, run: &Run) {
        self.outcomes.push(outcome_name(&run.outcome));
        if run.outcome == Outcome::Timeout {
            self.inconclusive = true;
        }
    }
}

fn outcome_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Value(_) => "value",
        Outcome::Blame(_) => "blame",
        Outcome::Stuck(_) => "stuck",
        Outcome::PreservationFail(_) => "preservation-fail",
        Outcome::Timeout => "timeout",
    }
}

fn describe(o: &Outcome, ty: &LType) -> String {
    match o {
        Outcome::Value(v) => v.render(ty),
        Outcome::Blame(p) => format!("blame {p}"),
        Outcome::Stuck(m) => format!("stuck: {m}"),
        Outcome::PreservationFail(m) => format!("preservation failure: {m}"),
        Outcome::Timeout => "timeout".into(),
    }
}

fn machine(cfg: &GenConfig, preserve: bool) -> MachineConfig {
    MachineConfig { fuel: cfg.fuel, trace: false, preserve, mutation: cfg.mutation }
}

/// Cast insertion must preserve the surface type and produce a well-typed term.
fn compile_checked(e: &Expr, ev: &mut Eval) -> Option<Compiled> {
    let c = match Compiled::from_expr(e.clone()) {
        Ok(c) => c,
        Err(err) => {
            ev.fail(ViolationKind::CompileFail, format!("compilation failed: {err}"));
            return None;
        }
    };
    if let Err(err) = cc::check(&program_ctx(), &HeapTyping::new(), Label::LOW, Level::Low, &c.term, &c.ty) {
        ev.fail(ViolationKind::CompileFail, format!("compiled term is ill-typed: {err}"));
        return None;
    }
    Some(c)
}

fn eval_safety(e: &Expr, cfg: &GenConfig) -> Eval {
    let mut ev = Eval::default();
    let Some(c) = compile_checked(e, &mut ev) else { return ev };
    for input in [true, false] {
        let r = c.run(input, machine(cfg, true));
        ev.record(&r);
        match &r.outcome {
            Outcome::Stuck(m) => ev.fail(ViolationKind::Stuck, format!("input {input}: {m}")),
            Outcome::PreservationFail(m) => ev.fail(ViolationKind::PreservationFail, format!("input {input}: {m}")),
            _ => {}
        }
    }
    ev
}

fn raw_const(v: &cc::Value) -> Option<cc::Const> {
    match v.raw {
        RawValue::Const(k) => Some(k),
        _ => None,
    }
}

fn eval_ni(e: &Expr, cfg: &GenConfig) -> Eval {
    let mut ev = Eval::default();
    let Some(c) = compile_checked(e, &mut ev) else { return ev };
    let runs = [true, false].map(|input| c.run(input, machine(cfg, false)));
    for r in &runs {
        ev.record(r);
    }
    if let (Outcome::Value(v1), Outcome::Value(v2)) = (&runs[0].outcome, &runs[1].outcome) {
        if raw_const(v1) != raw_const(v2) {
            let detail = format!("input true gives {}, input false gives {}", v1.render(&c.ty), v2.render(&c.ty));
            ev.fail(ViolationKind::NIFail, detail);
        }
    }
    let mut dyn_values = vec![];
    for (input, r) in [true, false].into_iter().zip(&runs) {
        let (d, _) = match c.run_dyn(input, cfg.fuel) {
            Ok(x) => x,
            Err(err) => {
                ev.fail(ViolationKind::SimFail, format!("erasure failed: {err}"));
                return ev;
            }
        };
        if let Outcome::Value(v) = &r.outcome {
            match &d {
                DOutcome::Value(dv) if !dynsec::value_sim(dv, v, &c.ty) => ev.fail(
                    ViolationKind::SimFail,
                    format!("input {input}: dynamic {dv} is not related to {}", v.render(&c.ty)),
                ),
                DOutcome::Value(_) => {}
                DOutcome::Timeout => ev.inconclusive = true,
                DOutcome::Nsu(site) => ev.fail(
                    ViolationKind::SimFail,
                    format!("input {input}: gradual run gives {} but dynamic run fails at {site}", v.render(&c.ty)),
                ),
                DOutcome::Stuck(m) => ev.fail(ViolationKind::SimFail, format!("input {input}: dynamic run stuck: {m}")),
            }
        }
        if let DOutcome::Value(dv) = d {
            dyn_values.push(dv);
        }
    }
    if let [a, b] = &dyn_values[..] {
        if a.level == Level::Low && b.level == Level::Low {
            if let (DRaw::Const(x), DRaw::Const(y)) = (&a.raw, &b.raw) {
                if x != y {
                    ev.fail(ViolationKind::NIFail, format!("dynamic runs give {a} and {b}"));
                }
            }
        }
    }
    ev
}

/// The outermost label coercion of a value at type `ty`.
fn top_seq(v: &cc::Value, ty: &LType) -> Option<Seq> {
    match &v.wrap {
        Some(c) => Some(c.seq.clone()),
        None => ty.label.level().map(Seq::id),
    }
}

fn eval_gg(precise: &Expr, eroded: &Expr, cfg: &GenConfig) -> Eval {
    let mut ev = Eval::default();
    let Some(cp) = compile_checked(precise, &mut ev) else { return ev };
    let ty = match check_program(eroded) {
        Ok(t) => t,
        Err(err) => {
            ev.fail(ViolationKind::StaticGGFail, format!("eroded program is ill-typed: {err}"));
            return ev;
        }
    };
    if !ty.precise_leq(&cp.ty) {
        ev.fail(ViolationKind::StaticGGFail, format!("eroded type {ty} is not less precise than {}", cp.ty));
        return ev;
    }
    let Some(ce) = compile_checked(eroded, &mut ev) else { return ev };
    for input in [true, false] {
        let rp = cp.run(input, machine(cfg, false));
        let re = ce.run(input, machine(cfg, false));
        ev.record(&rp);
        ev.record(&re);
        let Outcome::Value(vp) = &rp.outcome else { continue };
        let show = || {
            format!(
                "input {input}: precise gives {}, eroded gives {}",
                vp.render(&cp.ty),
                describe(&re.outcome, &ce.ty)
            )
        };
        match &re.outcome {
            Outcome::Timeout => {}
            Outcome::Value(ve) => {
                let same = match (&vp.raw, &ve.raw) {
                    (RawValue::Const(a), RawValue::Const(b)) => a == b,
                    (RawValue::Addr(a), RawValue::Addr(b)) => a == b,
                    (RawValue::Lam(..), RawValue::Lam(..)) => true,
                    _ => false,
                };
                let labels = match (top_seq(ve, &ce.ty), top_seq(vp, &cp.ty)) {
                    (Some(a), Some(b)) => a.precise_leq(&b),
                    _ => false,
                };
                if !same || !labels {
                    ev.fail(ViolationKind::GGFail, show());
                }
            }
            _ => ev.fail(ViolationKind::GGFail, show()),
        }
    }
    ev
}

fn eval(suite: Suite, case: &Case, cfg: &GenConfig) -> Eval {
    match (suite, case) {
        (Suite::Safety, Case::Program(e)) => eval_safety(e, cfg),
        (Suite::Ni, Case::Program(e)) => eval_ni(e, cfg),
        (Suite::Gg, Case::Pair { precise, eroded }) => eval_gg(precise, eroded, cfg),
        _ => panic!("case does not belong to suite {}", suite.name()),
    }
}

// ---------------------------------------------------------------------------
// Shrinking

/// Every term obtained from `e` by replacing one node with one of its children.
fn reductions(e: &Expr) -> Vec<Expr> {
    let kids = e.children();
    let mut out: Vec<Expr> = kids.iter().map(|c| (*c).clone()).collect();
    for (i, c) in kids.iter().enumerate() {
        for v in reductions(c) {
            let mut x = e.clone();
            *x.children_mut()[i] = v;
            out.push(x);
        }
    }
    out
}

fn candidates(case: &Case) -> Vec<Case> {
    let mut out = vec![];
    match case {
        Case::Program(e) => {
            for mut x in reductions(e) {
                x.number_blame();
                out.push(Case::Program(x));
            }
        }
        Case::Pair { precise, eroded } => {
            for (mut p, mut q) in reductions(precise).into_iter().zip(reductions(eroded)) {
                p.number_blame();
                q.number_blame();
                out.push(Case::Pair { precise: p, eroded: q });
            }
        }
    }
    out
}

fn case_type(case: &Case) -> Option<LType> {
    check_program(case.exprs()[0]).ok()
}

/// Greedily minimizes `case` while it stays well-typed at the same type and
/// keeps producing a violation of the same kind.
pub fn shrink(suite: Suite, case: &Case, kind: ViolationKind, cfg: &GenConfig) -> Case {
    let ty = case_type(case);
    let mut best = case.clone();
    for _ in 0..200 {
        let next = candidates(&best).into_iter().find(|c| {
            case_type(c).is_some()
                && (suite != Suite::Ni || case_type(c) == ty)
                && eval(suite, c, cfg).violation.is_some_and(|(k, _)| k == kind)
        });
        match next {
            Some(c) => best = c,
            None => break,
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub mutation: Mutation,
    /// Cases generated and checked.
    pub cases: usize,
    /// Cases where a run ran out of fuel before a verdict.
    pub inconclusive: usize,
    /// Cases the generator could not produce.
    pub skipped: usize,
    /// Cases whose compiled form contains a checked (`*`) construct.
    pub dynamic: usize,
    pub outcomes: BTreeMap<String, usize>,
    pub surface_constructs: BTreeMap<String, usize>,
    pub cc_constructs: BTreeMap<String, usize>,
    pub violations: Vec<Violation>,
}

const DYNAMIC_KINDS: [&str; 5] = ["app*", "if*", "ref?", "!*", "assign?"];

impl Report {
    pub fn empty(suite: Suite, seed: u64, mutation: Mutation) -> Report {
        Report {
            suite,
            seed,
            mutation,
            cases: 0,
            inconclusive: 0,
            skipped: 0,
            dynamic: 0,
            outcomes: BTreeMap::new(),
            surface_constructs: BTreeMap::new(),
            cc_constructs: BTreeMap::new(),
            violations: vec![],
        }
    }

    pub fn merge(mut self, other: Report) -> Report {
        assert_eq!((self.suite, self.seed), (other.suite, other.seed), "merging reports of different runs");
        self.cases += other.cases;
        self.inconclusive += other.inconclusive;
        self.skipped += other.skipped;
        self.dynamic += other.dynamic;
        for (mine, theirs) in [
            (&mut self.outcomes, other.outcomes),
            (&mut self.surface_constructs, other.surface_constructs),
            (&mut self.cc_constructs, other.cc_constructs),
        ] {
            for (k, n) in theirs {
                *mine.entry(k).or_default() += n;
            }
        }
        self.violations.extend(other.violations);
        self.violations.sort_by_key(|v| (v.index, v.kind));
        self
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn summary(&self) -> Summary {
        let mut violations = BTreeMap::new();
        for v in &self.violations {
            *violations.entry(format!("{:?}", v.kind)).or_default() += 1;
        }
        Summary {
            suite: self.suite,
            seed: self.seed,
            mutation: self.mutation.name(),
            cases: self.cases,
            inconclusive: self.inconclusive,
            skipped: self.skipped,
            dynamic: self.dynamic,
            violations,
            violation_cases: self.violations.iter().map(|v| (v.seed, v.index)).collect(),
            outcomes: self.outcomes.clone(),
            surface_constructs: self.surface_constructs.clone(),
            cc_constructs: self.cc_constructs.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let hist =
            |m: &BTreeMap<String, usize>| m.iter().map(|(k, n)| format!("{k}={n}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "suite {} seed {} mutation {}", self.suite.name(), self.seed, self.mutation.name());
        let _ = writeln!(s, "cases {} inconclusive {} skipped {}", self.cases, self.inconclusive, self.skipped);
        let _ = writeln!(s, "dynamic {}/{}", self.dynamic, self.cases);
        let _ = writeln!(s, "outcomes {}", hist(&self.outcomes));
        let _ = writeln!(s, "surface {}", hist(&self.surface_constructs));
        let _ = writeln!(s, "cc {}", hist(&self.cc_constructs));
        let _ = writeln!(s, "violations {}", self.violations.len());
        for v in &self.violations {
            let _ = writeln!(s, "violation {:?} seed {} index {}: {}", v.kind, v.seed, v.index, v.detail);
            let _ = writeln!(s, "  program: {}", v.program);
            if let Some(e) = &v.eroded {
                let _ = writeln!(s, "  eroded:  {e}");
            }
            let _ = writeln!(s, "  shrunk:  {}", v.shrunk);
            if let Some(e) = &v.shrunk_eroded {
                let _ = writeln!(s, "  shrunk eroded: {e}");
            }
        }
        s
    }
}

/// The machine-readable part of a report.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub suite: Suite,
    pub seed: u64,
    pub mutation: &'static str,
    pub cases: usize,
    pub inconclusive: usize,
    pub skipped: usize,
    pub dynamic: usize,
    pub violations: BTreeMap<String, usize>,
    /// `(seed, index)` of each violating case.
    pub violation_cases: Vec<(u64, usize)>,
    pub outcomes: BTreeMap<String, usize>,
    pub surface_constructs: BTreeMap<String, usize>,
    pub cc_constructs: BTreeMap<String, usize>,
}

/// Generates and checks case `index`.
pub fn check_case(suite: Suite, cfg: &GenConfig, index: usize) -> Report {
    let mut r = Report::empty(suite, cfg.seed, cfg.mutation);
    let Some(case) = generate(suite, cfg, index) else {
        r.skipped = 1;
        return r;
    };
    r.cases = 1;
    for e in case.exprs() {
        e.visit(&mut |n| *r.surface_constructs.entry(n.kind_name().to_string()).or_default() += 1);
        if let Ok(c) = Compiled::from_expr(e.clone()) {
            let mut dynamic = false;
            c.term.visit(&mut |t: &Term| {
                dynamic |= DYNAMIC_KINDS.contains(&t.kind());
                *r.cc_constructs.entry(t.kind().to_string()).or_default() += 1;
            });
            r.dynamic = r.dynamic.max(dynamic as usize);
        }
    }
    let ev = eval(suite, &case, cfg);
    r.inconclusive = ev.inconclusive as usize;
    for o in ev.outcomes {
        *r.outcomes.entry(o.to_string()).or_default() += 1;
    }
    if let Some((kind, detail)) = ev.violation {
        let shrunk = if cfg.shrink { shrink(suite, &case, kind, cfg) } else { case.clone() };
        let (program, eroded) = split(&case);
        let (s_program, s_eroded) = split(&shrunk);
        r.violations.push(Violation {
            kind,
            seed: cfg.seed,
            index,
            program,
            eroded,
            detail,
            shrunk: s_program,
            shrunk_eroded: s_eroded,
        });
    }
    r
}

fn split(case: &Case) -> (String, Option<String>) {
    match case {
        Case::Program(e) => (e.to_string(), None),
        Case::Pair { precise, eroded } => (precise.to_string(), Some(eroded.to_string())),
    }
}

/// Runs `suite` over cases `0..cfg.count` in parallel.
pub fn fuzz(suite: Suite, cfg: &GenConfig) -> Report {
    (0..cfg.count)
        .into_par_iter()
        .map(|i| check_case(suite, cfg, i))
        .reduce(|| Report::empty(suite, cfg.seed, cfg.mutation), Report::merge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_program, precise_leq, ParseOptions};

    fn cfg(count: usize) -> GenConfig {
        GenConfig { count, ..GenConfig::default() }
    }

    #[test]
    fn generation_is_deterministic() {
        let c = cfg(10);
        for i in 0..10 {
            assert_eq!(generate(Suite::Safety, &c, i), generate(Suite::Safety, &c, i));
        }
    }

    #[test]
    fn generated_programs_are_well_typed_and_round_trip() {
        let c = cfg(200);
        for i in 0..200 {
            let Some(Case::Program(e)) = generate(Suite::Ni, &c, i) else { panic!() };
            assert_eq!(check_program(&e).unwrap(), LType::bool(Level::Low));
            let back = parse_program(&e.to_string(), ParseOptions::default()).unwrap();
            assert_eq!(back, e, "{e}");
        }
    }

    #[test]
    fn erosion_is_less_precise() {
        let c = cfg(50);
        for i in 0..50 {
            if let Some(Case::Pair { precise, eroded }) = generate(Suite::Gg, &c, i) {
                assert!(precise_leq(&eroded, &precise));
                assert_ne!(eroded, precise);
            }
        }
    }

    #[test]
    fn merge_is_associative() {
        let c = cfg(3);
        let [a, b, d] = [0, 1, 2].map(|i| check_case(Suite::Safety, &c, i));
        let left = a.clone().merge(b.clone()).merge(d.clone());
        let right = a.merge(b.merge(d));
        assert_eq!(serde_json::to_string(&left.summary()).unwrap(), serde_json::to_string(&right.summary()).unwrap());
    }

    #[test]
    fn empty_run() {
        let r = fuzz(Suite::Safety, &cfg(0));
        assert_eq!(r.cases, 0);
        assert!(r.violations.is_empty());
    }
}

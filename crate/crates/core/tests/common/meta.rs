//! Exhaustive checks of the coercion metatheory on the two-point lattice.
//! Each check panics on the first counterexample.

use std::collections::{HashMap, HashSet};

use gradual_ifc::coercion::{enumerate, Head, Seq, Single};
use gradual_ifc::lattice::{Label, Level};
use gradual_ifc::pc::{LabelExpr, Pc};

/// Terminal forms reachable from `s` and the longest reduction path, by the rule relation.
fn explore(s: &Seq, memo: &mut HashMap<Seq, (HashSet<Seq>, usize)>) -> (HashSet<Seq>, usize) {
    if let Some(r) = memo.get(s) {
        return r.clone();
    }
    let next = s.steps();
    let r = if next.is_empty() {
        (HashSet::from([s.clone()]), 0)
    } else {
        let mut ends = HashSet::new();
        let mut longest = 0;
        for (_, t) in next {
            let (e, n) = explore(&t, memo);
            ends.extend(e);
            longest = longest.max(n + 1);
        }
        (ends, longest)
    };
    memo.insert(s.clone(), r.clone());
    r
}

fn reachable(s: &Seq) -> Vec<Seq> {
    let mut seen = HashSet::from([s.clone()]);
    let mut todo = vec![s.clone()];
    while let Some(x) = todo.pop() {
        for (_, y) in x.steps() {
            if seen.insert(y.clone()) {
                todo.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// Precision by direct recursion on the rules.
fn prec(c: &Seq, d: &Seq) -> bool {
    let init = |s: &Seq| Seq { head: s.head, tail: s.tail[..s.tail.len() - 1].to_vec() };
    if let (Head::Id(g), Head::Id(h), true, true) = (c.head, d.head, c.tail.is_empty(), d.tail.is_empty()) {
        if g.precise_leq(h) {
            return true;
        }
    }
    if let (Head::Fail { source, target, .. }, true) = (d.head, d.tail.is_empty()) {
        if c.source().precise_leq(source) && c.target().precise_leq(target) {
            return true;
        }
    }
    if let (Some(&x), Some(&y)) = (c.tail.last(), d.tail.last()) {
        if x.source().precise_leq(y.source()) && x.target().precise_leq(y.target()) && prec(&init(c), &init(d)) {
            return true;
        }
    }
    if let Some(&x) = c.tail.last() {
        let g = d.target();
        if x.source().precise_leq(g) && x.target().precise_leq(g) && prec(&init(c), d) {
            return true;
        }
    }
    if let Some(&y) = d.tail.last() {
        let g = c.target();
        if g.precise_leq(y.source()) && g.precise_leq(y.target()) && prec(c, &init(d)) {
            return true;
        }
    }
    false
}

fn specific_normal_forms(all: &[Seq]) -> Vec<Seq> {
    all.iter().filter(|s| s.is_normal() && s.source().level().is_some()).cloned().collect()
}

fn s(t: &str) -> Seq {
    t.parse().unwrap()
}

pub fn normalization_is_unique_and_bounded() {
    let all = enumerate(5);
    let mut memo = HashMap::new();
    for c in &all {
        let (ends, longest) = explore(c, &mut memo);
        assert_eq!(ends.len(), 1, "{c} has several normal forms");
        let end = ends.into_iter().next().unwrap();
        assert!(end.is_normal() || end.is_fail(), "{c} reduces to {end}");
        assert!(longest <= c.len() * c.len(), "{c} takes {longest} steps");
        let (fast, n) = c.normalize_counted();
        assert_eq!(fast, end, "{c}");
        assert!(n <= longest);
    }
}

pub fn precision_oracle_agrees() {
    let all = enumerate(4);
    for c in &all {
        for d in &all {
            assert_eq!(c.precise_leq(d), prec(c, d), "{c} vs {d}");
        }
    }
}

pub fn composition_models_explicit_flow() {
    let all = enumerate(4);
    let mut checked = 0;
    for c in specific_normal_forms(&all) {
        for d in all.iter().filter(|d| d.source() == c.target()) {
            let (r, _) = c.compose(d).normalize_counted();
            if r.is_normal() {
                assert!(c.security().leq(r.security()), "{c} ; {d} gives {r}");
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "{checked}");
}

pub fn stamping_models_implicit_flow() {
    let all = enumerate(4);
    for c in specific_normal_forms(&all) {
        for l in [Level::Low, Level::High] {
            let a = c.stamp(l);
            let b = c.stamp_bang(l);
            assert!(a.is_normal() && b.is_normal(), "{c}");
            assert_eq!(a.security(), c.security().join(l), "stamp {c} {l}");
            assert_eq!(b.security(), c.security().join(l), "stamp! {c} {l}");
            assert_eq!(b.target(), Label::Star);
        }
    }
}

pub fn security_is_monotone() {
    let nfs = specific_normal_forms(&enumerate(4));
    let mut related = 0;
    for c in &nfs {
        for d in &nfs {
            if c.precise_leq(d) {
                related += 1;
                assert!(c.security().leq(d.security()), "{c} ⊑ {d}");
            }
        }
    }
    assert!(related > nfs.len());
}

pub fn related_sequences_simulate_steps() {
    let all = enumerate(4);
    let mut pairs = 0;
    for c in &all {
        let from_c = reachable(c);
        for d in &all {
            if !c.precise_leq(d) {
                continue;
            }
            pairs += 1;
            for (_, d2) in d.steps() {
                assert!(from_c.iter().any(|c2| c2.precise_leq(&d2)), "{c} ⊑ {d}, but nothing matches {d2}");
            }
        }
    }
    assert!(pairs > 1000);
}

pub fn stamping_preserves_precision() {
    let nfs = specific_normal_forms(&enumerate(4));
    for c in &nfs {
        for d in &nfs {
            if c.precise_leq(d) {
                for l in [Level::Low, Level::High] {
                    assert!(c.stamp(l).precise_leq(&d.stamp(l)), "stamp {c} ⊑ {d} at {l}");
                    assert!(c.stamp_bang(l).precise_leq(&d.stamp_bang(l)), "stamp! {c} ⊑ {d} at {l}");
                }
            }
        }
    }
}

pub fn sequence_examples() {
    assert_eq!(s("id(low);low!").target(), Label::Star);
    assert_eq!(s("id(low);up;high!").source(), Label::LOW);
    assert!("id(low);high!".parse::<Seq>().is_err());
    assert_eq!(s("id(low);low!;high?p1").normalize_counted().0, s("id(low);up"));
    assert_eq!(s("id(low);up;high!;low?p1").normalize_counted().0, s("bot(p1,low,low)"));
    assert_eq!(s("id(high);high!;high?p1").normalize_counted().0, s("id(high)"));
    assert_eq!(s("id(low);low!").compose(&s("bot(p1,*,low)")), s("bot(p1,low,low)"));
    assert_eq!(s("id(low);low!").compose(&s("id(*)")), s("id(low);low!;id(*)"));
    assert_eq!(s("id(low);low!").compose(&s("id(*);high?p1")).normalize_counted().0, s("id(low);up"));
    assert_eq!(s("id(low);up;high!").security(), Level::High);
    assert_eq!(s("id(low)").security(), Level::Low);
    assert_eq!(s("id(high);high!").security(), Level::High);
    assert!(!s("id(high)").precise_leq(&s("id(low)")));
    assert!(s("id(low);low!").precise_leq(&s("bot(p1,low,low)")));
    assert_eq!(s("id(high);high!").stamp_bang(Level::Low), s("id(high);high!"));
    assert_eq!(s("id(low);up").stamp_bang(Level::High), s("id(low);up;high!"));
    for c in specific_normal_forms(&enumerate(4)) {
        assert_eq!(c.stamp(Level::Low), c);
    }
}

fn pc(base: Level, seq: &str) -> Pc {
    Pc { base, seq: Some(s(seq)) }
}

pub fn label_expression_examples() {
    let e = LabelExpr::Cast(
        Box::new(LabelExpr::Cast(Box::new(LabelExpr::Lit(Level::Low)), s("id(low);low!"))),
        s("id(*);high?p1"),
    );
    assert_eq!(e.normalize(), Ok(pc(Level::Low, "id(low);up")));
    assert_eq!(e.normalize_by_steps(), e.normalize());
    let id = LabelExpr::Cast(Box::new(LabelExpr::Lit(Level::High)), s("id(high)"));
    assert_eq!(id.normalize_by_steps(), Ok(Pc::lit(Level::High)));
    let bad = LabelExpr::Cast(
        Box::new(LabelExpr::Cast(Box::new(LabelExpr::Lit(Level::High)), s("id(high);high!"))),
        s("id(*);low?p3"),
    );
    assert_eq!(bad.normalize_by_steps(), Err("p3".parse().unwrap()));
    assert_eq!(bad.normalize(), bad.normalize_by_steps());

    assert_eq!(Pc::lit(Level::Low).stamp(Level::High), pc(Level::Low, "id(low);up"));
    assert_eq!(Pc::lit(Level::High).stamp(Level::High), Pc::lit(Level::High));
    assert_eq!(pc(Level::Low, "id(low);up").stamp(Level::High), pc(Level::Low, "id(low);up"));
    assert_eq!(Pc::lit(Level::Low).stamp_bang(Level::High), pc(Level::Low, "id(low);up;high!"));
    assert_eq!(Pc::lit(Level::High).stamp_bang(Level::Low), pc(Level::High, "id(high);high!"));
    assert_eq!(pc(Level::Low, "id(low);up").stamp_bang(Level::High), pc(Level::Low, "id(low);up;high!"));
    assert_eq!(pc(Level::Low, "id(low);up").security(), Level::High);
    assert_eq!(Pc::lit(Level::High).security(), Level::High);
    assert_eq!(pc(Level::Low, "id(low);low!").security(), Level::Low);
}

/// Every normal PC: a literal, or a literal wrapped by an irreducible sequence from it.
fn normal_pcs() -> Vec<Pc> {
    let mut out = vec![Pc::lit(Level::Low), Pc::lit(Level::High)];
    for c in enumerate(4) {
        if let (true, Some(l)) = (c.is_irreducible(), c.source().level()) {
            out.push(Pc { base: l, seq: Some(c) });
        }
    }
    out
}

pub fn label_expressions_model_flows() {
    let all = enumerate(4);
    for e in normal_pcs() {
        assert!(e.well_formed());
        for l in [Level::Low, Level::High] {
            assert_eq!(e.stamp(l).security(), e.security().join(l));
            assert_eq!(e.stamp_bang(l).security(), e.security().join(l));
        }
        for c in all.iter().filter(|c| c.source() == e.label()) {
            let by_steps = LabelExpr::Cast(Box::new(e.to_expr()), c.clone()).normalize_by_steps();
            assert_eq!(e.cast(c), by_steps, "{e} cast by {c}");
            if let Ok(e2) = by_steps {
                assert!(e.security().leq(e2.security()), "{e} cast by {c} gives {e2}");
            }
        }
    }
}

pub fn single_coercion_endpoints() {
    assert_eq!(Single::Up.source(), Label::LOW);
    assert_eq!(Single::Up.target(), Label::HIGH);
    assert_eq!(Single::Inj(Level::High).target(), Label::Star);
}

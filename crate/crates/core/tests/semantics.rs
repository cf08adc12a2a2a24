//! Worked examples for each layer: labels and types, value coercions, the
//! surface checker, cast insertion, the machine, and the dynamic language.

use gradual_ifc::cc::{self, Addr, Const, Ctx, HeapTyping, Machine, MachineConfig, Outcome, RawValue, Term, Value};
use gradual_ifc::coercion::{BlameLabel, Seq};
use gradual_ifc::compile::compile_program;
use gradual_ifc::dynsec::{self, DOutcome, DRaw, DTerm, DValue, NsuSite};
use gradual_ifc::lattice::{LType, Label, Level, RawType};
use gradual_ifc::pc::Pc;
use gradual_ifc::pipeline::Compiled;
use gradual_ifc::surface::{self, check_program, parse_program, parse_type, precise_leq, ExprKind, ParseOptions};
use gradual_ifc::vcoercion::{apply_cast, coerce, coerce_id, stamp_val, RawCoercion, VCoercion};

fn ty(s: &str) -> LType {
    parse_type(s).unwrap()
}

fn seq(s: &str) -> Seq {
    s.parse().unwrap()
}

fn prog(s: &str) -> surface::Expr {
    parse_program(s, ParseOptions::default()).unwrap()
}

const P: BlameLabel = BlameLabel(1);

#[test]
fn labels_and_types() {
    assert!(Level::Low.leq(Level::High));
    assert!(!Level::High.leq(Level::Low));
    assert!(Level::Low.leq(Level::Low));
    assert!(Label::Star.precise_leq(Label::HIGH));
    assert!(ty("Bool@*").precise_leq(&ty("Bool@low")));
    assert!(!ty("Bool@high").precise_leq(&ty("Bool@low")));
    assert!(Label::HIGH.consistent_leq(Label::Star));
    assert!(!ty("Bool@high").consistent_leq(&ty("Bool@low")));
    assert!(ty("Ref Bool@high @ low").consistent_leq(&ty("Ref Bool@* @ *")));
    assert_eq!(Label::LOW.consistent_join(Label::Star), Label::Star);
    assert_eq!(ty("Bool@low").consistent_join(&ty("Bool@high")), Some(ty("Bool@high")));
    assert_eq!(ty("Ref Bool@* @ low").consistent_join(&ty("Ref Bool@high @ low")), Some(ty("Ref Bool@high @ low")));
    assert_eq!(Label::HIGH.consistent_meet(Label::Star), Label::Star);
    assert_eq!(Label::LOW.consistent_meet(Label::HIGH), Label::LOW);
    let f = "(Bool@low -[low]-> Bool@low)";
    assert_eq!(ty(&format!("{f}@low")).consistent_meet(&ty(&format!("{f}@high"))), Some(ty(&format!("{f}@low"))));
    assert_eq!(Label::Star.precision_join(Label::HIGH), Some(Label::HIGH));
    assert_eq!(Label::LOW.precision_join(Label::LOW), Some(Label::LOW));
    assert_eq!(Label::LOW.precision_join(Label::HIGH), None);
    assert_eq!(ty("Bool@low").stamp(Level::High), ty("Bool@high"));
    assert_eq!(ty("Bool@*").stamp(Level::High), ty("Bool@*"));
    assert_eq!(ty("Unit@low").stamp(Level::Low), ty("Unit@low"));
}

fn boolean(b: bool) -> Value {
    Value { raw: RawValue::Const(Const::Bool(b)), wrap: None }
}

fn wrapped(b: bool, s: &str) -> Value {
    Value {
        raw: RawValue::Const(Const::Bool(b)),
        wrap: Some(VCoercion { raw: RawCoercion::Base(gradual_ifc::lattice::Base::Bool), seq: seq(s) }),
    }
}

#[test]
fn value_coercions() {
    let c = VCoercion { raw: RawCoercion::Base(gradual_ifc::lattice::Base::Bool), seq: seq("id(low);up") };
    assert_eq!(c.types(), Some((ty("Bool@low"), ty("Bool@high"))));
    assert_eq!(coerce_id(&ty("Bool@low")).to_string(), "<id(Bool), id(low)>");
    let r = coerce_id(&ty("Ref Bool@low @ low"));
    assert!(
        matches!(&r.raw, RawCoercion::Ref(a, b) if **a == coerce_id(&ty("Bool@low")) && **b == coerce_id(&ty("Bool@low")))
    );
    assert_eq!(coerce(&ty("Bool@high"), &ty("Bool@*"), P).seq, seq("id(high);high!"));
    assert_eq!(coerce(&ty("Bool@*"), &ty("Bool@low"), P).seq, seq("id(*);low?p1"));
    assert_eq!(coerce(&ty("Bool@low"), &ty("Bool@low"), P).seq, seq("id(low)"));
    let bad = VCoercion {
        raw: RawCoercion::Ref(Box::new(coerce_id(&ty("Bool@low"))), Box::new(coerce_id(&ty("Bool@high")))),
        seq: seq("id(low)"),
    };
    assert_eq!(bad.types(), None);
    let fc = coerce_id(&ty("(Bool@low -[low]-> Bool@low)@low"));
    assert_eq!(fc.types(), Some((ty("(Bool@low -[low]-> Bool@low)@low"), ty("(Bool@low -[low]-> Bool@low)@low"))));

    let inj = VCoercion { raw: RawCoercion::Base(gradual_ifc::lattice::Base::Bool), seq: seq("id(low);low!") };
    let proj = VCoercion { raw: RawCoercion::Base(gradual_ifc::lattice::Base::Bool), seq: seq("id(*);high?p1") };
    assert_eq!(inj.compose(&proj).seq, seq("id(low);up"));

    let write = coerce(&ty("Bool@*"), &ty("Bool@high"), P);
    let read = coerce(&ty("Bool@high"), &ty("Bool@*"), P);
    let r1 = VCoercion { raw: RawCoercion::Ref(Box::new(write.clone()), Box::new(read.clone())), seq: seq("id(low)") };
    let r2 = coerce(&ty("Ref Bool@* @ low"), &ty("Ref Bool@* @ *"), P);
    let RawCoercion::Ref(w, d) = r1.compose(&r2).raw else { panic!() };
    let RawCoercion::Ref(w2, d2) = &r2.raw else { panic!() };
    assert_eq!(*w, w2.compose(&write));
    assert_eq!(*d, read.compose(d2));

    assert_eq!(apply_cast(&boolean(true), &coerce_id(&ty("Bool@low"))), Ok(boolean(true)));
    let high = wrapped(true, "id(low);up;high!");
    assert_eq!(apply_cast(&high, &coerce(&ty("Bool@*"), &ty("Bool@low"), BlameLabel(4))), Err(BlameLabel(4)));
    let already = wrapped(false, "id(low);low!");
    assert_eq!(apply_cast(&already, &coerce_id(&ty("Bool@*"))), Ok(already.clone()));

    assert_eq!(stamp_val(&boolean(true), &ty("Bool@low"), Level::High), wrapped(true, "id(low);up"));
    assert_eq!(stamp_val(&boolean(true), &ty("Bool@high"), Level::High), boolean(true));
    assert_eq!(stamp_val(&already, &ty("Bool@*"), Level::High), wrapped(false, "id(low);up;high!"));
}

#[test]
fn parsing_defaults() {
    let e = prog("let f = lam (b : Bool@*) . b in f (user-input)");
    let ExprKind::Let { bound, body, .. } = &e.kind else { panic!() };
    assert!(matches!(&bound.kind, ExprKind::Lam { pc: Label::Star, level: Level::Low, .. }));
    let ExprKind::App { arg, .. } = &body.kind else { panic!() };
    assert!(matches!(&arg.kind, ExprKind::Var(x) if x == surface::INPUT));
    assert!(matches!(prog("true").kind, ExprKind::Const(Const::Bool(true), Level::Low)));
    let r = prog("ref high true");
    let ExprKind::Ref { level: Level::High, init, blame } = &r.kind else { panic!() };
    assert!(matches!(init.kind, ExprKind::Const(Const::Bool(true), Level::Low)));
    assert_eq!(*blame, BlameLabel(1));
    assert!(parse_program("lam (x : Bool@low) . x", ParseOptions { strict_pc: true }).is_err());
    assert!(parse_program("let x = in x", ParseOptions::default()).is_err());
}

#[test]
fn rendering_round_trips() {
    for src in [
        "let f = lam [low] (b : Bool@*) . false in publish (f user-input)",
        "let y = (ref high true : Ref Bool@* @ *) in if user-input then y := false else unit",
        "(lam [*] (x : (Bool@low -[high]-> Unit@*)@low) . x true @high) (lam [high] (y : Bool@low) . unit)",
        "!(ref low (lam [low] (x : Bool@low) . x))",
    ] {
        let e = prog(src);
        assert_eq!(prog(&e.to_string()), e, "{src}");
    }
}

#[test]
fn surface_typing() {
    let fid =
        "let fid = lam [low] (b : Bool@low) . b in let input = user-input in let result = fid input in publish result";
    let err = check_program(&prog(fid)).unwrap_err();
    assert_eq!(err.rule, "app");
    assert!(check_program(&prog(
        "let flip = (lam [low] (b : Bool@high) . if b then false else true : (Bool@high -[low]-> Bool@low)@low) in flip user-input"
    ))
    .is_err());
    let left = "let x = user-input in let y = (ref high true : Ref Bool@* @ *) in if x then y := false else unit";
    assert_eq!(check_program(&prog(left)).unwrap(), ty("Unit@high"));
}

#[test]
fn surface_precision() {
    let star = prog("lam [low] (b : Bool@*) . false");
    let high = prog("lam [low] (b : Bool@high) . false");
    assert!(precise_leq(&star, &high));
    assert!(!precise_leq(&high, &star));
    assert!(!precise_leq(&prog("true@low"), &prog("true@high")));
    let left = prog("let x = user-input in let y = (ref high true : Ref Bool@* @ *) in if x then y := false else unit");
    let right =
        prog("let x = user-input in let y = (ref high true : Ref Bool@high @ high) in if x then y := false else unit");
    assert!(precise_leq(&left, &right));
    let eroded = surface::erode_site(&surface::erode_site(&right, 0), 1);
    assert_eq!(eroded, left);
    assert_eq!(surface::erode_site(&left, 0), left);
    assert_eq!(surface::erode_site(&high, 1), star);
}

fn kinds(t: &Term) -> Vec<&'static str> {
    let mut v = vec![];
    t.visit(&mut |n| v.push(n.kind()));
    v
}

#[test]
fn cast_insertion() {
    let right =
        prog("let x = user-input in let y = (ref high true : Ref Bool@high @ high) in if x then y := false else unit");
    let (t, a) = compile_program(&right).unwrap();
    cc::check(&surface::program_ctx(), &HeapTyping::new(), Label::LOW, Level::Low, &t, &a).unwrap();
    assert!(kinds(&t).contains(&"assign"));
    assert!(!kinds(&t).contains(&"assign?"));

    let fid = prog(
        "let fid = lam [low] (b : Bool@*) . b in let input = user-input in let result = fid input in publish result",
    );
    let (t, _) = compile_program(&fid).unwrap();
    let mut seqs = vec![];
    t.visit(&mut |n| {
        if let Term::Cast(_, c) = n {
            seqs.push(c.seq.to_string());
        }
    });
    assert!(seqs.iter().any(|s| s.ends_with("high!")), "{seqs:?}");
    assert!(seqs.iter().any(|s| s.contains("low?")), "{seqs:?}");

    let flip = prog(
        "let flip = (lam [low] (b : Bool@*) . if b then false else true : (Bool@* -[low]-> Bool@low)@low) in flip user-input",
    );
    let (t, _) = compile_program(&flip).unwrap();
    assert!(kinds(&t).contains(&"if*"));
    let mut inj = false;
    t.visit(&mut |n| {
        if let Term::Cast(m, c) = n {
            inj |= matches!(**m, Term::Const(_)) && c.seq == seq("id(low);low!");
        }
    });
    assert!(inj);
}

#[test]
fn cast_calculus_typing() {
    let sigma = HeapTyping::new();
    let prot = Term::Prot {
        pc: Pc::lit(Level::High),
        level: Level::High,
        body: Box::new(Term::Const(Const::Bool(true))),
        ty: ty("Bool@high"),
    };
    assert!(cc::check(&Ctx::new(), &sigma, Label::LOW, Level::Low, &prot, &ty("Bool@high")).is_ok());
    assert!(cc::check(&Ctx::new(), &sigma, Label::LOW, Level::Low, &prot, &ty("Bool@low")).is_err());
    let a = Addr { level: Level::Low, index: 0 };
    let mut sigma = HeapTyping::new();
    sigma.insert(a, RawType::bool());
    let assign = Term::Assign {
        lhs: Box::new(Term::Addr(a)),
        rhs: Box::new(Term::Const(Const::Bool(true))),
        raw: RawType::bool(),
        cell: Level::Low,
        level: Level::Low,
    };
    assert!(cc::check(&Ctx::new(), &sigma, Label::LOW, Level::Low, &assign, &ty("Unit@low")).is_ok());
    assert!(cc::check(&Ctx::new(), &sigma, Label::HIGH, Level::High, &assign, &ty("Unit@low")).is_err());
}

fn traced(src: &str, input: bool) -> (Outcome, Vec<&'static str>) {
    let c = Compiled::from_source(src, ParseOptions::default()).unwrap();
    let r = c.run(input, MachineConfig { trace: true, preserve: true, ..MachineConfig::default() });
    (r.outcome, r.trace.iter().map(|l| l.rule).collect())
}

#[test]
fn machine_rules() {
    let (o, rules) = traced("if true then false else true", true);
    assert_eq!(rules, ["if-true", "prot-val"]);
    assert_eq!(o, Outcome::Value(boolean(false)));

    let (o, rules) =
        traced("let a = ref low true in let c = (user-input : Bool@*) in if c then a := false else a := true", true);
    assert!(matches!(o, Outcome::Blame(_)), "{o:?}");
    assert!(rules.contains(&"if*-true-cast"));

    let (o, _) = traced(
        "let x = user-input in let y = (ref high true : Ref Bool@* @ *) in if x then y := false else unit",
        true,
    );
    let Outcome::Value(v) = o else { panic!() };
    assert_eq!(v.raw, RawValue::Const(Const::Unit));

    let (o, _) = traced(
        "let flip = (lam [low] (b : Bool@*) . if b then false else true : (Bool@* -[low]-> Bool@low)@low) in flip user-input",
        false,
    );
    assert!(matches!(o, Outcome::Blame(_)));

    let m = Machine::new(MachineConfig { fuel: 3, ..MachineConfig::default() });
    let omega = Term::App {
        fun: Box::new(Term::Lam("x".into(), Box::new(Term::Const(Const::Unit)))),
        arg: Box::new(Term::Const(Const::Unit)),
        dom: ty("Unit@low"),
        cod: ty("Unit@low"),
        level: Level::Low,
    };
    assert_eq!(
        m.run(omega, &ty("Unit@low")).outcome,
        Outcome::Value(Value { raw: RawValue::Const(Const::Unit), wrap: None })
    );
}

#[test]
fn erasure() {
    let c = Compiled::from_source("publish (user-input : Bool@*)", ParseOptions::default()).unwrap();
    assert_eq!(dynsec::erase(&c.term, &c.ty).unwrap(), DTerm::Var(surface::INPUT.into()));
    let k = dynsec::erase(&Term::Const(Const::Bool(true)), &ty("Bool@high")).unwrap();
    assert_eq!(k, DTerm::Const(Const::Bool(true), Level::High));
    let right =
        Compiled::from_source("let y = (ref high true : Ref Bool@high @ high) in y := false", ParseOptions::default())
            .unwrap();
    let mut assigns = 0;
    fn count(t: &DTerm, n: &mut usize) {
        match t {
            DTerm::Assign(a, b, None) => {
                *n += 1;
                count(a, n);
                count(b, n);
            }
            DTerm::App(a, b) | DTerm::Assign(a, b, _) => {
                count(a, n);
                count(b, n);
            }
            DTerm::Lam(_, b, _) | DTerm::Ref(_, b, _) | DTerm::Deref(b) | DTerm::Prot(_, b) => count(b, n),
            DTerm::If(a, b, c) => {
                count(a, n);
                count(b, n);
                count(c, n);
            }
            _ => {}
        }
    }
    count(&dynsec::erase(&right.term, &right.ty).unwrap(), &mut assigns);
    assert_eq!(assigns, 1);
}

fn dv(b: bool, l: Level) -> DValue {
    DValue { raw: DRaw::Const(Const::Bool(b)), level: l }
}

#[test]
fn dynamic_language() {
    let bx = Box::new;
    let id = DTerm::App(
        bx(DTerm::Lam("x".into(), bx(DTerm::Var("x".into())), Level::Low)),
        bx(DTerm::Const(Const::Bool(true), Level::High)),
    );
    assert_eq!(dynsec::run(id, 100).0, DOutcome::Value(dv(true, Level::High)));

    let nsu = DTerm::If(
        bx(DTerm::Const(Const::Bool(true), Level::High)),
        bx(DTerm::Ref(Level::Low, bx(DTerm::Const(Const::Unit, Level::Low)), None)),
        bx(DTerm::Ref(Level::High, bx(DTerm::Const(Const::Unit, Level::Low)), None)),
    );
    assert_eq!(dynsec::run(nsu, 100).0, DOutcome::Nsu(NsuSite::Ref(Level::Low, None)));

    let branch = DTerm::If(
        bx(DTerm::Const(Const::Bool(true), Level::High)),
        bx(DTerm::Const(Const::Bool(false), Level::Low)),
        bx(DTerm::Const(Const::Bool(true), Level::Low)),
    );
    assert_eq!(dynsec::run(branch, 100).0, DOutcome::Value(dv(false, Level::High)));
}

#[test]
fn simulation_on_values() {
    assert!(dynsec::value_sim(&dv(true, Level::Low), &boolean(true), &ty("Bool@low")));
    assert!(dynsec::value_sim(&dv(true, Level::Low), &wrapped(true, "id(low);up"), &ty("Bool@high")));
    assert!(!dynsec::value_sim(&dv(true, Level::High), &boolean(true), &ty("Bool@low")));
    assert!(!dynsec::value_sim(&dv(false, Level::Low), &boolean(true), &ty("Bool@low")));
}

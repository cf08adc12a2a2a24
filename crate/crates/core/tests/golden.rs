mod common;

use std::time::Duration;

use common::{check_golden, observe, source, Observed, GOLDEN};
use gradual_ifc::pipeline::Compiled;
use gradual_ifc::surface::{self, ParseOptions};

#[test]
fn golden_outcomes() {
    for g in &GOLDEN {
        let t = check_golden(g).unwrap_or_else(|e| panic!("{e}"));
        assert!(t < Duration::from_secs(1), "{} took {t:?}", g.name);
    }
}

#[test]
fn every_example_file_is_covered() {
    let mut files: Vec<String> = std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/examples"))
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "gifc").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    files.sort();
    let mut names: Vec<String> = GOLDEN.iter().map(|g| g.name.to_string()).collect();
    names.sort();
    assert_eq!(files, names);
}

fn parse(name: &str) -> surface::Expr {
    surface::parse_program(&source(name), ParseOptions::default()).unwrap()
}

#[test]
fn star_variants_are_erosions() {
    for (precise, eroded) in [("fconst_static", "fconst_star"), ("nsu_right", "nsu_left")] {
        assert!(surface::precise_leq(&parse(eroded), &parse(precise)), "{eroded} ⊑ {precise}");
    }
    assert!(!surface::precise_leq(&parse("fid_static"), &parse("fid_star")));
}

#[test]
fn left_and_right_share_a_type() {
    let l = Compiled::from_expr(parse("nsu_left")).unwrap();
    let r = Compiled::from_expr(parse("nsu_right")).unwrap();
    assert_eq!(l.ty, r.ty);
    assert_eq!(l.ty.to_string(), "Unit@high");
}

#[test]
fn gradual_variants_run_where_static_ones_typecheck() {
    for input in [true, false] {
        let a = observe(&source("fconst_static"), input).unwrap();
        let b = observe(&source("fconst_star"), input).unwrap();
        assert_eq!(a, b);
        assert_eq!(observe(&source("fid_static"), input).unwrap(), Observed::TypeError);
    }
}

#[test]
fn erased_examples_agree_with_the_machine() {
    for name in ["fconst_static", "fconst_star", "nsu_left", "nsu_right"] {
        let c = Compiled::from_expr(parse(name)).unwrap();
        for input in [true, false] {
            let (d, _) = c.run_dyn(input, 10_000).unwrap();
            assert!(matches!(d, gradual_ifc::dynsec::DOutcome::Value(_)), "{name} {input}: {d:?}");
        }
    }
}

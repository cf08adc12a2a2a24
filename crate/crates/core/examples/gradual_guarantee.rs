//! Erode label annotations one site at a time and compare outcomes.

use gradual_ifc::cc::{MachineConfig, Outcome};
use gradual_ifc::pipeline::Compiled;
use gradual_ifc::surface::{erode_site, label_sites, parse_program, precise_leq, ParseOptions};

const SRC: &str = "
let f = (lam [low] (b : Bool@high) . if b then unit else unit : (Bool@high -[low]-> Unit@high)@low) in
let y = (ref high true : Ref Bool@high @ high) in
let u = f user-input in
if user-input then y := false else unit
";

fn show(e: &gradual_ifc::surface::Expr) -> String {
    match Compiled::from_expr(e.clone()) {
        Err(err) => format!("type error: {err}"),
        Ok(c) => match c.run(true, MachineConfig::default()).outcome {
            Outcome::Value(v) => format!("{} : {}", v.render(&c.ty), c.ty),
            Outcome::Blame(p) => format!("blame {p}"),
            other => format!("{other:?}"),
        },
    }
}

fn main() {
    let precise = parse_program(SRC, ParseOptions::default()).expect("parses");
    println!("original: {}", show(&precise));
    let mut e = precise.clone();
    for site in 0..label_sites(&precise) {
        let next = erode_site(&e, site);
        if next == e {
            continue;
        }
        assert!(precise_leq(&next, &e));
        e = next;
        println!("after site {site:>2}: {}", show(&e));
    }
    println!("\nfully eroded:\n{e}");
}

//! Writes to the heap under a secret branch.

use gradual_ifc::cc::{MachineConfig, Outcome};
use gradual_ifc::pipeline::Compiled;
use gradual_ifc::surface::ParseOptions;

const PROGRAMS: [(&str, &str); 4] = [
    ("high cell, static", "let y = (ref high true : Ref Bool@high @ high) in if user-input then y := false else unit"),
    ("high cell, unknown", "let y = (ref high true : Ref Bool@* @ *) in if user-input then y := false else unit"),
    ("low cell, unknown branch", "let a = ref low true in if (user-input : Bool@*) then a := false else a := true"),
    (
        "low cell read back",
        "let a = ref low true in let u = (if (user-input : Bool@*) then a := false else unit) in publish !a",
    ),
];

fn main() {
    for (name, src) in PROGRAMS {
        let c = Compiled::from_source(src, ParseOptions::default()).expect("well typed");
        print!("{name:<26} : {:<10}", c.ty.to_string());
        for input in [true, false] {
            let r = c.run(input, MachineConfig::default());
            let shown = match r.outcome {
                Outcome::Value(v) => v.render(&c.ty),
                Outcome::Blame(p) => format!("blame {p}"),
                other => format!("{other:?}"),
            };
            print!("  {input}: {shown:<34} heap={}", r.heap.len());
        }
        println!();
    }
}

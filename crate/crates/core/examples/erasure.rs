//! Erase compiled programs into the dynamic language and run both sides.

use gradual_ifc::cc::{MachineConfig, Outcome};
use gradual_ifc::dynsec::{value_sim, DOutcome};
use gradual_ifc::pipeline::Compiled;
use gradual_ifc::surface::ParseOptions;

const PROGRAMS: [&str; 4] = [
    "let f = lam [low] (b : Bool@*) . false in publish (f user-input)",
    "publish (user-input : Bool@*)",
    "let a = ref low true in if (user-input : Bool@*) then a := false else a := true",
    "let r = ref high user-input in if !r then false else true",
];

fn main() {
    for src in PROGRAMS {
        let c = Compiled::from_source(src, ParseOptions::default()).expect("well typed");
        println!("{src}\n  erased: {}", c.erased(true).expect("erasable"));
        for input in [true, false] {
            let cc = c.run(input, MachineConfig::default()).outcome;
            let (dy, _) = c.run_dyn(input, 10_000).expect("erasable");
            let agree = match (&cc, &dy) {
                (Outcome::Value(v), DOutcome::Value(d)) => value_sim(d, v, &c.ty).to_string(),
                _ => "-".into(),
            };
            let cc = match cc {
                Outcome::Value(v) => v.render(&c.ty),
                Outcome::Blame(p) => format!("blame {p}"),
                other => format!("{other:?}"),
            };
            let dy = match dy {
                DOutcome::Value(d) => d.to_string(),
                DOutcome::Nsu(site) => format!("NSU at {site}"),
                other => format!("{other:?}"),
            };
            println!("  {input:>5}: machine {cc}; dynamic {dy}; related {agree}");
        }
    }
}

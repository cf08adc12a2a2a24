//! Parse, check, compile and run a program on both values of the secret input.
//!
//! ```text
//! cargo run --example run_program -- crates/core/examples/flip_star.gifc
//! ```

use gradual_ifc::cc::{MachineConfig, Outcome};
use gradual_ifc::pipeline::Compiled;
use gradual_ifc::surface::ParseOptions;

const DEFAULT: &str = "
let fid = lam [low] (b : Bool@*) . b in
let input = user-input in
publish (fid input)
";

fn main() {
    let src = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => DEFAULT.to_string(),
    };
    let c = match Compiled::from_source(&src, ParseOptions::default()) {
        Ok(c) => c,
        Err(e) => {
            println!("rejected: {e}");
            return;
        }
    };
    println!("type: {}", c.ty);
    println!("compiled: {}", c.term);
    for input in [true, false] {
        let r = c.run(input, MachineConfig { trace: true, preserve: true, ..MachineConfig::default() });
        println!("\ninput = {input}");
        for line in &r.trace {
            println!("{line}");
        }
        match r.outcome {
            Outcome::Value(v) => println!("=> {}", v.render(&c.ty)),
            Outcome::Blame(p) => println!("=> blame {p}"),
            other => println!("=> {other:?}"),
        }
    }
}

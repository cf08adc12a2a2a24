#![allow(dead_code)]

pub mod meta;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use gradual_ifc::cc::{MachineConfig, Outcome};
use gradual_ifc::pipeline::{Compiled, PipelineError};
use gradual_ifc::surface::ParseOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    TypeError,
    Value(&'static str),
    Blame(u32),
}

pub struct Golden {
    pub name: &'static str,
    pub on_true: Expect,
    pub on_false: Expect,
}

const fn both(name: &'static str, e: Expect) -> Golden {
    Golden { name, on_true: e, on_false: e }
}

const UNIT_HIGH: &str = "unit@low<id(Unit), id(low);up>";

pub const GOLDEN: [Golden; 11] = [
    both("fconst_static", Expect::Value("false@low")),
    both("fconst_star", Expect::Value("false@low")),
    both("fid_static", Expect::TypeError),
    both("fid_star", Expect::Blame(2)),
    both("flip_static", Expect::TypeError),
    both("flip_star", Expect::Blame(1)),
    Golden { name: "nsu_fail", on_true: Expect::Blame(4), on_false: Expect::Blame(5) },
    both("nsu_left", Expect::Value(UNIT_HIGH)),
    both("nsu_right", Expect::Value(UNIT_HIGH)),
    both("mix", Expect::Blame(2)),
    both("smix", Expect::Blame(1)),
];

pub fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.gifc"))
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(path(name)).unwrap()
}

#[derive(Debug, PartialEq, Eq)]
pub enum Observed {
    TypeError,
    Value(String),
    Blame(u32),
}

impl Observed {
    pub fn matches(&self, e: Expect) -> bool {
        match (self, e) {
            (Observed::TypeError, Expect::TypeError) => true,
            (Observed::Value(v), Expect::Value(w)) => v == w,
            (Observed::Blame(p), Expect::Blame(q)) => *p == q,
            _ => false,
        }
    }
}

pub fn observe(src: &str, input: bool) -> Result<Observed, String> {
    let c = match Compiled::from_source(src, ParseOptions::default()) {
        Ok(c) => c,
        Err(PipelineError::Type(_)) => return Ok(Observed::TypeError),
        Err(e) => return Err(e.to_string()),
    };
    let r = c.run(input, MachineConfig { preserve: true, ..MachineConfig::default() });
    match r.outcome {
        Outcome::Value(v) => Ok(Observed::Value(v.render(&c.ty))),
        Outcome::Blame(p) => Ok(Observed::Blame(p.0)),
        other => Err(format!("{other:?}")),
    }
}

/// Checks one golden program on both inputs; returns the slower of the two runs.
pub fn check_golden(g: &Golden) -> Result<Duration, String> {
    let src = source(g.name);
    let mut slowest = Duration::ZERO;
    for (input, want) in [(true, g.on_true), (false, g.on_false)] {
        let t = Instant::now();
        let got = observe(&src, input)?;
        slowest = slowest.max(t.elapsed());
        if !got.matches(want) {
            return Err(format!("{} on {input}: expected {want:?}, got {got:?}", g.name));
        }
    }
    Ok(slowest)
}

//! Gradual information-flow control.
//!
//! Programs in a gradually labeled surface language are type checked,
//! compiled into a cast calculus whose casts are label coercions, and run on a
//! small-step machine that tracks the program counter as a label expression.
//! A dynamically checked IFC language with no-sensitive-upgrade checks is
//! included as a reference point, together with an erasure from the cast
//! calculus into it.
//!
//! Runnable examples live in `examples/`:
//!
//! - `coercions`: label coercion sequences, normalization, stamping, precision
//! - `run_program`: parse, check, compile and run a `.gifc` file
//! - `secure_heap`: the no-sensitive-upgrade check on a gradually labeled heap
//! - `erasure`: erasing compiled programs and running them dynamically
//! - `gradual_guarantee`: eroding annotations and comparing outcomes
//! - `fuzzing`: the safety, noninterference and gradual guarantee fuzzers

pub mod cc;
pub mod coercion;
pub mod compile;
pub mod dynsec;
pub mod harness;
pub mod lattice;
pub mod pc;
pub mod pipeline;
pub mod surface;
pub mod vcoercion;

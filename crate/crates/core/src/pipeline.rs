//! End-to-end helpers: parse, check, compile, and run a program.

use thiserror::Error;

use crate::cc::{Const, Machine, MachineConfig, Run, Term};
use crate::compile::compile_program;
use crate::dynsec::{self, DHeap, DOutcome, DTerm, EraseError};
use crate::lattice::{LType, Level};
use crate::surface::{check_program, parse_program, Expr, ParseError, ParseOptions, TypeError, INPUT};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Erase(#[from] EraseError),
}

/// A checked and compiled program.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub source: Expr,
    pub ty: LType,
    pub term: Term,
}

impl Compiled {
    pub fn from_expr(source: Expr) -> Result<Compiled, TypeError> {
        let ty = check_program(&source)?;
        let (term, compiled_ty) = compile_program(&source)?;
        debug_assert_eq!(ty, compiled_ty);
        Ok(Compiled { source, ty, term })
    }

    pub fn from_source(src: &str, opts: ParseOptions) -> Result<Compiled, PipelineError> {
        Ok(Compiled::from_expr(parse_program(src, opts)?)?)
    }

    /// The compiled term with the secret input bound to `input`.
    pub fn closed(&self, input: bool) -> Term {
        self.term.subst(INPUT, &Term::Const(Const::Bool(input)))
    }

    pub fn run(&self, input: bool, config: MachineConfig) -> Run {
        Machine::new(config).run(self.closed(input), &self.ty)
    }

    /// The erased program with the secret input bound to `input@high`.
    pub fn erased(&self, input: bool) -> Result<DTerm, EraseError> {
        let t = dynsec::erase(&self.term, &self.ty)?;
        Ok(t.subst(INPUT, &DTerm::Const(Const::Bool(input), Level::High)))
    }

    pub fn run_dyn(&self, input: bool, fuel: usize) -> Result<(DOutcome, DHeap), EraseError> {
        Ok(dynsec::run(self.erased(input)?, fuel))
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gradual_ifc::cc::{MachineConfig, Mutation, Outcome};
use gradual_ifc::dynsec::DOutcome;
use gradual_ifc::harness::{self, GenConfig, Suite};
use gradual_ifc::pipeline::{Compiled, PipelineError};
use gradual_ifc::surface::ParseOptions;

#[derive(Parser)]
#[command(name = "gifc", about = "Gradual information-flow control toolchain", version)]
struct Cli {
    /// Reject functions and arrow types without an explicit PC label.
    #[arg(long, global = true)]
    strict_pc: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type check a program and print its type.
    Check { file: PathBuf },
    /// Compile a program to the cast calculus.
    Compile {
        file: PathBuf,
        /// Print the compiled term.
        #[arg(long)]
        emit_cc: bool,
    },
    /// Run a compiled program.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        input: bool,
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
        /// Re-check typing after every step.
        #[arg(long)]
        preserve: bool,
    },
    /// Print the erasure of a compiled program.
    Erase { file: PathBuf },
    /// Run the erasure of a compiled program under the dynamic monitor.
    RunDyn {
        file: PathBuf,
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        input: bool,
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
    },
    /// Run a property-based test suite.
    Fuzz {
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Write a JSON summary to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_depth: usize,
        #[arg(long, default_value_t = 0.4)]
        star_bias: f64,
        /// Run with a deliberately broken rule.
        #[arg(long, value_parser = parse_mutation, default_value = "none")]
        mutate: Mutation,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Safety,
    Ni,
    Gg,
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    Mutation::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = std::iter::once(Mutation::None).chain(Mutation::ALL).map(Mutation::name).collect();
        format!("unknown mutation `{s}`; expected one of {}", names.join(", "))
    })
}

const OK: u8 = 0;
const BLAME: u8 = 1;
const STATIC: u8 = 2;
const DEFECT: u8 = 3;

fn load(path: &Path, opts: ParseOptions) -> Result<Compiled, u8> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        STATIC
    })?;
    Compiled::from_source(&src, opts).map_err(|e| {
        match e {
            PipelineError::Parse(e) => eprintln!("{}: {e}", path.display()),
            PipelineError::Type(e) => eprintln!("{}: {e}", path.display()),
            PipelineError::Erase(e) => eprintln!("{}: {e}", path.display()),
        }
        STATIC
    })
}

fn run(cli: Cli) -> Result<u8, u8> {
    let opts = ParseOptions { strict_pc: cli.strict_pc };
    match cli.command {
        Command::Check { file } => {
            let c = load(&file, opts)?;
            println!("{}", c.ty);
            Ok(OK)
        }
        Command::Compile { file, emit_cc } => {
            let c = load(&file, opts)?;
            if emit_cc {
                println!("{}", c.term);
            }
            println!("{}", c.ty);
            Ok(OK)
        }
        Command::Run { file, input, trace, fuel, preserve } => {
            let c = load(&file, opts)?;
            let r = c.run(input, MachineConfig { fuel, trace, preserve, mutation: Mutation::None });
            for line in &r.trace {
                println!("{line}");
            }
            Ok(match r.outcome {
                Outcome::Value(v) => {
                    println!("{}", v.render(&c.ty));
                    OK
                }
                Outcome::Blame(p) => {
                    println!("blame {p}");
                    BLAME
                }
                Outcome::Timeout => {
                    println!("timeout after {} steps", r.steps);
                    DEFECT
                }
                Outcome::Stuck(msg) => {
                    println!("stuck: {msg}");
                    DEFECT
                }
                Outcome::PreservationFail(msg) => {
                    println!("preservation failure: {msg}");
                    DEFECT
                }
            })
        }
        Command::Erase { file } => {
            let c = load(&file, opts)?;
            match gradual_ifc::dynsec::erase(&c.term, &c.ty) {
                Ok(t) => {
                    println!("{t}");
                    Ok(OK)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Err(DEFECT)
                }
            }
        }
        Command::RunDyn { file, input, fuel } => {
            let c = load(&file, opts)?;
            let (o, _) = c.run_dyn(input, fuel).map_err(|e| {
                eprintln!("{e}");
                DEFECT
            })?;
            Ok(match o {
                DOutcome::Value(v) => {
                    println!("{v}");
                    OK
                }
                DOutcome::Nsu(site) => {
                    println!("NSU error at {site}");
                    BLAME
                }
                DOutcome::Stuck(msg) => {
                    println!("stuck: {msg}");
                    DEFECT
                }
                DOutcome::Timeout => {
                    println!("timeout");
                    DEFECT
                }
            })
        }
        Command::Fuzz { kind, seed, count, out, max_depth, star_bias, mutate } => {
            let suite = match kind {
                Kind::Safety => Suite::Safety,
                Kind::Ni => Suite::Ni,
                Kind::Gg => Suite::Gg,
            };
            let cfg = GenConfig { seed, count, max_depth, star_bias, mutation: mutate, ..GenConfig::default() };
            let report = harness::fuzz(suite, &cfg);
            print!("{}", report.to_text());
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&report.summary()).expect("summary serializes");
                std::fs::write(&path, json + "\n").map_err(|e| {
                    eprintln!("cannot write {}: {e}", path.display());
                    STATIC
                })?;
            }
            Ok(if report.violations.is_empty() { OK } else { DEFECT })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { STATIC } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(c) | Err(c) => ExitCode::from(c),
    }
}

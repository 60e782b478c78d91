//! `pc`: inspect, reduce, evaluate and compare power circuits.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use power_circuit::io::{parse_circuit, serialize_circuit, CircuitFile};
use power_circuit::{is_power_circuit, Marking, ReducedCircuit, TreedCircuit, DEFAULT_MAX_BITS};
use power_circuit_cli::{finish, read_text, Failure};

#[derive(Parser)]
#[command(name = "pc", version, about = "Base-q power circuits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reports whether the file describes a power circuit.
    Check { file: String },
    /// Writes an equivalent reduced circuit.
    Reduce {
        file: String,
        /// Output file (stdout if omitted).
        #[arg(short = 'o')]
        out: Option<String>,
        /// Also compact every marking (default).
        #[arg(long, conflicts_with = "simple")]
        treed: bool,
        /// Plain reduction; markings keep arbitrary digits.
        #[arg(long)]
        simple: bool,
    },
    /// Prints the value of a marking.
    Eval {
        file: String,
        mark: String,
        #[arg(long, default_value_t = DEFAULT_MAX_BITS)]
        max_bits: u64,
    },
    /// Compares two markings.
    Cmp { file: String, m: String, k: String },
}

fn load(path: &str) -> Result<CircuitFile, Failure> {
    Ok(parse_circuit(&read_text(path)?)?)
}

fn marking<'a>(markings: &'a BTreeMap<String, Marking>, name: &str) -> Result<&'a Marking, Failure> {
    markings
        .get(name)
        .ok_or_else(|| Failure::input(format!("no marking named '{name}'")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Check { file } => {
            let f = load(&file)?;
            let ok = is_power_circuit(&f.circuit)?;
            println!("{}", if ok { "power-circuit" } else { "not-a-power-circuit" });
        }
        Cmd::Reduce {
            file,
            out,
            treed: _,
            simple,
        } => {
            let f = load(&file)?;
            let names = f.markings;
            let text = if simple {
                let (rc, _) = ReducedCircuit::reduce(f.circuit)?;
                serialize_circuit(rc.circuit(), names.iter().map(|(k, v)| (k.as_str(), v)))?
            } else {
                let (mut t, _) = TreedCircuit::make_tree(f.circuit)?;
                for m in names.values() {
                    t.compactify_marking(m)?;
                }
                serialize_circuit(t.circuit(), names.iter().map(|(k, v)| (k.as_str(), v)))?
            };
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Failure::input(format!("{path}: {e}")))?,
                None => print!("{text}"),
            }
        }
        Cmd::Eval {
            file,
            mark,
            max_bits,
        } => {
            let f = load(&file)?;
            let m = marking(&f.markings, &mark)?;
            println!("{}", f.circuit.eval_marking(m, max_bits)?);
        }
        Cmd::Cmp { file, m, k } => {
            let CircuitFile { circuit, markings } = load(&file)?;
            let (mm, kk) = (marking(&markings, &m)?, marking(&markings, &k)?);
            let (rc, _) = ReducedCircuit::reduce(circuit)?;
            let o = rc.compare(mm, kk)?;
            let sym = match o.ord {
                std::cmp::Ordering::Less => "<",
                std::cmp::Ordering::Equal => "=",
                std::cmp::Ordering::Greater => ">",
            };
            println!("{sym} unit-diff={}", o.unit_diff);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    finish("pc", run(Cli::parse()))
}

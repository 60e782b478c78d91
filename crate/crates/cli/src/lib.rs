//! Shared plumbing of the `pc` and `wp` command-line tools.

use std::process::ExitCode;

use power_circuit::Error;

/// Exit status for a computed answer.
pub const EXIT_OK: u8 = 0;
/// Exit status for malformed input (syntax, validation, unknown names).
pub const EXIT_INPUT: u8 = 2;
/// Exit status when the input is not a power circuit or a value is too big.
pub const EXIT_VALUE: u8 = 3;
/// Exit status for anything unexpected.
pub const EXIT_INTERNAL: u8 = 1;

/// Maps a library error to the documented exit status.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotAPowerCircuit(_) | Error::Overflow(_) => EXIT_VALUE,
        Error::InvalidBase(_)
        | Error::InvalidDigit { .. }
        | Error::Cycle(..)
        | Error::MultiEdge(..)
        | Error::MalformedWord(_)
        | Error::Parse { .. }
        | Error::Validation(_) => EXIT_INPUT,
        _ => EXIT_INTERNAL,
    }
}

/// A failure carrying its exit status and message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            msg: e.to_string(),
        }
    }
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            msg: msg.into(),
        }
    }
}

/// Reads a whole text file, reporting I/O problems as input errors.
pub fn read_text(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))
}

/// Prints the failure (if any) to stderr and converts it to an exit code.
pub fn finish(tool: &str, r: Result<(), Failure>) -> ExitCode {
    match r {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("{tool}: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

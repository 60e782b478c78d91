//! `wp`: word problems of generalized Higman groups and `BG(q)`.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use power_circuit::io::{parse_bg_word, parse_word};
use power_circuit::{bg_trivial, higman_trivial, Mode};
use power_circuit_cli::{finish, Failure};

#[derive(Parser)]
#[command(name = "wp", version, about = "Word problems via power circuits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Use plain reduced circuits instead of treed ones.
    #[arg(long, global = true)]
    simple: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// H_f(1,q): tokens a<i>, a<i>^<e>, A<i>.
    Higman {
        #[arg(short = 'q')]
        q: i64,
        #[arg(short = 'f')]
        f: usize,
        #[arg(allow_hyphen_values = true)]
        word: Vec<String>,
    },
    /// BG(q): tokens a, b, a^<e>, b^<e>, A, B.
    Bg {
        #[arg(short = 'q')]
        q: i64,
        #[arg(allow_hyphen_values = true)]
        word: Vec<String>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mode = if cli.simple { Mode::Simple } else { Mode::Treed };
    let trivial = match cli.cmd {
        Cmd::Higman { q, f, word } => {
            let w = parse_word(&word.join(" "), f)?;
            higman_trivial(&w, q, f, mode)?
        }
        Cmd::Bg { q, word } => {
            let w = parse_bg_word(&word.join(" "))?;
            bg_trivial(&w, q, mode)?
        }
    };
    println!("{}", if trivial { "trivial" } else { "nontrivial" });
    Ok(())
}

fn main() -> ExitCode {
    finish("wp", run(Cli::parse()))
}

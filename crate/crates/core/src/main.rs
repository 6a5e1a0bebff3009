//! Command-line front end: loads script files, then reads commands from
//! standard input.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cpl_core::reduce::DEFAULT_FUEL;
use cpl_core::session::{Flow, Session};

#[derive(Parser, Debug)]
#[command(
    name = "cpl",
    version,
    about = "Categorical Programming Language interpreter"
)]
struct Args {
    /// Script files loaded in order before the interactive loop.
    files: Vec<PathBuf>,
    /// Exit after loading the files instead of reading standard input.
    #[arg(long)]
    no_repl: bool,
    /// Maximum number of reduction steps per `simp`.
    #[arg(long, default_value_t = DEFAULT_FUEL, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut session = Session::new().with_fuel(args.fuel);
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let mut flow = Flow::Continue;
    for path in &args.files {
        match session.load_file(path, &mut out, &mut err) {
            Ok(f) => flow = f,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return ExitCode::FAILURE;
            }
        }
        if flow == Flow::Quit {
            break;
        }
    }
    if !args.no_repl && flow == Flow::Continue {
        let _ = writeln!(
            out,
            "Categorical Programming Language (version {})",
            env!("CARGO_PKG_VERSION")
        );
        let stdin = io::stdin();
        let mut lines = stdin.lock().lines();
        loop {
            let _ = write!(out, "{}", session.prompt());
            let _ = out.flush();
            let Some(Ok(line)) = lines.next() else {
                let _ = writeln!(out);
                break;
            };
            if session.process_line(&line, None, &mut out, &mut err) == Flow::Quit {
                break;
            }
        }
    }
    if session.diagnostics() > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

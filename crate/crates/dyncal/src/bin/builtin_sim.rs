//! A bundled simulator behind the external-process protocol.
//!
//! Usage: `builtin-sim <easom|harari_steinberg|bliznyuk>`. Reads `input.csv`
//! from the working directory (native units) and writes `output.csv`.

use std::path::Path;
use std::process::ExitCode;

use dyncal::external::answer_with_builtin;
use dyncal_core::BuiltinSimulator;

fn run() -> Result<(), String> {
    let name = std::env::args().nth(1).ok_or("usage: builtin-sim <simulator>")?;
    let sim = BuiltinSimulator::by_name(&name).ok_or_else(|| format!("unknown simulator `{name}`"))?;
    answer_with_builtin(&sim, Path::new("."))
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("builtin-sim: {e}");
            ExitCode::FAILURE
        }
    }
}

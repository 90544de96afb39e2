//! Bundled simulator served over the external-process protocol, for the
//! round-trip criterion.

use std::path::Path;
use std::process::ExitCode;

use dyncal::external::answer_with_builtin;
use dyncal_core::BuiltinSimulator;

fn main() -> ExitCode {
    let name = std::env::args().nth(1).unwrap_or_default();
    let Some(sim) = BuiltinSimulator::by_name(&name) else {
        eprintln!("protocol-sim: unknown simulator `{name}`");
        return ExitCode::FAILURE;
    };
    match answer_with_builtin(&sim, Path::new(".")) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("protocol-sim: {e}");
            ExitCode::FAILURE
        }
    }
}

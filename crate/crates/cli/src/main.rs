use std::io::{self, LineWriter, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = LineWriter::new(stdout.lock());
    let mut err = io::stderr().lock();
    let code = postal_rps::commands::run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}

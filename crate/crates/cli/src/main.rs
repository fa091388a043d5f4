use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = wigrot_cli::run(std::env::args_os(), &mut out, &mut io::stderr());
    if out.flush().is_err() && code == wigrot_cli::EXIT_OK {
        return ExitCode::from(wigrot_cli::EXIT_IO as u8);
    }
    ExitCode::from(code as u8)
}

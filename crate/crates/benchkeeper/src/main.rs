use std::io::{self, BufReader};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut input = BufReader::new(io::stdin());
    let code = benchkeeper::cli::run(std::env::args().collect(), &mut input, &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}

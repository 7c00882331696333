use std::io::{self, BufWriter, Write};

fn main() {
    let mut out = BufWriter::new(io::stdout());
    let mut err = io::stderr();
    let code = sociolorenz_cli::run(std::env::args_os(), &mut out, &mut err);
    if out.flush().is_err() && code == 0 {
        std::process::exit(sociolorenz_cli::EXIT_USAGE);
    }
    std::process::exit(code);
}

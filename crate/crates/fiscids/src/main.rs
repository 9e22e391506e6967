use std::io;

fn main() {
    let code = fiscids::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}

use std::io::{self, BufWriter, Write};

fn main() {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = antichain_cli::run(std::env::args_os(), &mut stdin.lock(), &mut out, &mut io::stderr());
    let _ = out.flush();
    std::process::exit(code);
}

use std::io::{stderr, stdout};

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let code = tasynth_cli::run_command(&argv, &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}

use clap::Parser;
use fscad_cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = run(cli, &mut out) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}

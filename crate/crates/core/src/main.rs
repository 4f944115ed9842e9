use clap::Parser;
use std::io::Write;

fn main() {
    let cli = seqpipe::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = seqpipe::run(&cli, &mut out) {
        let _ = out.flush();
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

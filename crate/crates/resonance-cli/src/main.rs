use clap::Parser;

use resonance_cli::{run, Cli, CliError, CmdStatus};

fn main() {
    // Clap exits with code 2 on usage errors by itself.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(CmdStatus::Clean) => {}
        Ok(CmdStatus::ParticleErrors(n)) => {
            eprintln!("{n} particle(s) finished with errors; see the error rows");
            std::process::exit(3);
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}

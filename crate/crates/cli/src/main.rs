use clap::Parser;
use tilekit_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}

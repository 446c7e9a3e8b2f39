use clap::Parser;

use limsup_cli::commands::{execute, Cli};

fn main() {
    let out = execute(Cli::parse());
    for line in &out.stdout {
        println!("{line}");
    }
    for line in &out.stderr {
        eprintln!("{line}");
    }
    std::process::exit(out.code);
}

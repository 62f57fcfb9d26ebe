use clap::Parser;
use hermcone_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (code, text) = run(&cli);
    if !text.is_empty() {
        println!("{text}");
    }
    std::process::exit(code);
}

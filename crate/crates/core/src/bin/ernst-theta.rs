use clap::Parser;
use ernst_theta::cli::{self, Args};

fn main() {
    let args = Args::parse();
    std::process::exit(cli::run(&args));
}

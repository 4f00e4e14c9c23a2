use clap::Parser;

use ramseykit::cli::{run_with_pool, Cli};

fn main() {
    let cli = Cli::parse();
    let (output, code) = run_with_pool(&cli);
    print!("{output}");
    std::process::exit(code);
}

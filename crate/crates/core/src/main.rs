use clap::Parser;

fn main() {
    let cli = jacspec::cli::Cli::parse();
    std::process::exit(jacspec::cli::main_with(cli));
}

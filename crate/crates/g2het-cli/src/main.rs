use clap::Parser;

fn main() {
    let args = g2het_cli::cli::Cli::parse();
    std::process::exit(g2het_cli::cli::run(args));
}

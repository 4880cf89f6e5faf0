use clap::Parser;

fn main() {
    let cli = supcon_cli::Cli::parse();
    std::process::exit(supcon_cli::run(cli));
}

use clap::Parser;

fn main() {
    let cli = rst_cli::Cli::parse();
    std::process::exit(rst_cli::main_with(cli));
}

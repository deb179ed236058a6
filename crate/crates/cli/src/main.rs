use clap::Parser;

fn main() {
    let args = elva_cli::cli::Args::parse();
    std::process::exit(elva_cli::cli::execute(&args));
}

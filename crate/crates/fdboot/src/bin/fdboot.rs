use clap::Parser;

fn main() {
    let cli = fdboot::cli::Cli::parse();
    if let Err(e) = fdboot::cli::execute(cli) {
        eprintln!("fdboot: {e}");
        std::process::exit(e.exit_code());
    }
}

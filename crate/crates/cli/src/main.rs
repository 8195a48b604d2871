use clap::Parser;

fn main() {
    let cli = slsm_cli::Cli::parse();
    if let Err(e) = slsm_cli::run(cli) {
        eprintln!("slsm: {e}");
        std::process::exit(e.exit_code());
    }
}

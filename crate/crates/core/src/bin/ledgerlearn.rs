fn main() {
    std::process::exit(ledgerlearn::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(cifc_cli::run(std::env::args().collect()));
}

fn main() {
    std::process::exit(macsim::cli::run_cli(std::env::args_os()));
}

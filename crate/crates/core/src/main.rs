fn main() {
    std::process::exit(adelic_market::cli::run_cli(std::env::args_os()));
}

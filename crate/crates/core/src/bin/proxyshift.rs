fn main() {
    std::process::exit(proxyshift::cli::run_cli(std::env::args_os()));
}

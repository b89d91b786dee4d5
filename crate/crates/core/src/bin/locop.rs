fn main() {
    std::process::exit(locop::cli::run_cli(std::env::args_os()));
}

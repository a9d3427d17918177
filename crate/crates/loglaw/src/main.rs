fn main() {
    std::process::exit(loglaw::cli::run_from(std::env::args_os()));
}

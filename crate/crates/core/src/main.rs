fn main() {
    std::process::exit(herd_unwrap::cli::run(std::env::args_os()));
}

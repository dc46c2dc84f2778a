fn main() {
    std::process::exit(superint_cli::run(std::env::args_os()));
}

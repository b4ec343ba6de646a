fn main() {
    std::process::exit(crnwd::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(divplan::cli::run(std::env::args_os()));
}

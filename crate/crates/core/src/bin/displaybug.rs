fn main() {
    std::process::exit(displaybug::cli::run(std::env::args_os()));
}

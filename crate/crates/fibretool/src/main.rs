fn main() {
    std::process::exit(fibretool::cli::run(std::env::args_os()));
}

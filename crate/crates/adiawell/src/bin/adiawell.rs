fn main() {
    std::process::exit(adiawell::cli::run(std::env::args_os()));
}

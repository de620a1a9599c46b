fn main() {
    std::process::exit(gaborkit::cli::main_with_args(std::env::args_os()));
}

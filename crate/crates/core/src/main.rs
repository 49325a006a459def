fn main() {
    std::process::exit(binconv::cli::main_with_args(std::env::args_os()));
}

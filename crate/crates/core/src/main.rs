fn main() {
    std::process::exit(sisosd::cli::main_with_args(std::env::args_os()));
}

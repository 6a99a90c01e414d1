fn main() {
    std::process::exit(riforest::cli::main_with_args(std::env::args_os()));
}

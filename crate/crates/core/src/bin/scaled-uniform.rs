fn main() {
    std::process::exit(scaled_uniform::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(cold_plasma_cli::main_with_args(std::env::args_os()));
}

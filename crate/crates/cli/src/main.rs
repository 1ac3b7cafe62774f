fn main() {
    std::process::exit(aqm_cli::main_with_args(std::env::args_os()));
}

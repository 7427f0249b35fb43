fn main() {
    std::process::exit(cic_core::cli::main_with_args(std::env::args_os()));
}

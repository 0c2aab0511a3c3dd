fn main() {
    std::process::exit(walklab::cli::main_with_args(std::env::args_os()));
}

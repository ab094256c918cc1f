fn main() {
    std::process::exit(gkpdd::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(ibsat::cli::main_with(std::env::args_os()));
}

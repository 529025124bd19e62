fn main() {
    std::process::exit(cie::cli::main_exit_code());
}

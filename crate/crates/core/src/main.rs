fn main() {
    std::process::exit(halfline::cli::main_exit_code());
}

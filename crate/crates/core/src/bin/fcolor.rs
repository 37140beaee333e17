fn main() {
    std::process::exit(fcolor::cli::main());
}

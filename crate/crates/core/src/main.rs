fn main() {
    std::process::exit(dfdrift::cli::main());
}

fn main() {
    std::process::exit(dagpost::cli::main());
}

fn main() {
    std::process::exit(minerl::cli::main());
}

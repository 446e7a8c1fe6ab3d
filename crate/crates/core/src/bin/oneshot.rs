fn main() {
    std::process::exit(oneshot::cli::main());
}

fn main() {
    std::process::exit(setpack::cli::run());
}

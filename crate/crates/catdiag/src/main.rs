fn main() {
    std::process::exit(catdiag::cli::run());
}

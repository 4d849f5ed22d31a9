fn main() {
    std::process::exit(cogdiag::cli::run());
}

fn main() {
    std::process::exit(ikw::cli::run());
}

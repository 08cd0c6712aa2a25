fn main() {
    std::process::exit(cartan_codes::cli::run());
}

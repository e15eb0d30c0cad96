fn main() {
    std::process::exit(cfmm_arb::cli::run());
}

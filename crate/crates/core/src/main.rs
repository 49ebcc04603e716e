fn main() {
    std::process::exit(pgog::cli::run());
}

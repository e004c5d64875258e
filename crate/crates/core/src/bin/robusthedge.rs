fn main() {
    std::process::exit(robusthedge::cli::run());
}

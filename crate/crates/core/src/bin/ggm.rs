fn main() {
    std::process::exit(decomposable_ggm::cli::run(std::env::args_os()));
}

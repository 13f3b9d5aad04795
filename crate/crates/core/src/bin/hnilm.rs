fn main() {
    std::process::exit(hnilm::cli::run(std::env::args_os()));
}

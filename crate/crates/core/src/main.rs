fn main() {
    std::process::exit(dimest::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(lz_bloch::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(qewa::cli::run(std::env::args_os()));
}

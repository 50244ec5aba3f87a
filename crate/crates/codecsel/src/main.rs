fn main() {
    std::process::exit(codecsel::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(mixsel::cli::run(std::env::args_os()));
}

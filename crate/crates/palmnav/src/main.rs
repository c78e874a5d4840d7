fn main() {
    std::process::exit(palmnav::cli::run_from(std::env::args_os()));
}

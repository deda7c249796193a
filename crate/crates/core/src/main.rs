fn main() {
    std::process::exit(delayloop::cli::run(std::env::args_os()));
}

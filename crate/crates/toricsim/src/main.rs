fn main() {
    std::process::exit(toricsim::cli::run(std::env::args_os()));
}

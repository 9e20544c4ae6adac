fn main() {
    std::process::exit(lieconf::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(diamond_entropy::cli::parse_and_dispatch(std::env::args_os()));
}

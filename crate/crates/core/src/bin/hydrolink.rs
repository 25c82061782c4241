fn main() {
    std::process::exit(hydrolink::cli::run(std::env::args_os()));
}

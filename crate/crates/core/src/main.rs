fn main() {
    std::process::exit(gaussnet::harness::cli::run(std::env::args_os()));
}

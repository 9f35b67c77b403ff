fn main() {
    std::process::exit(cpdigraph::cli::run(std::env::args_os()));
}

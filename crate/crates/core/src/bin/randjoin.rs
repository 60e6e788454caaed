fn main() {
    std::process::exit(randjoin::cli::run(std::env::args_os()));
}

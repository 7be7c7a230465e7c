fn main() {
    std::process::exit(qpack_lab::cli::run(std::env::args_os()));
}

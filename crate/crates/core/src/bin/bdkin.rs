fn main() {
    std::process::exit(bdkin::cli::run(std::env::args_os()));
}

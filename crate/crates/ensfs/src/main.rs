fn main() {
    std::process::exit(ensfs::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(murmur_core::cli::run_from(std::env::args_os()));
}

fn main() {
    std::process::exit(icll_core::cli::run(std::env::args_os()));
}

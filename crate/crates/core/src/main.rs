fn main() {
    std::process::exit(msrg::cli::run(std::env::args_os()));
}

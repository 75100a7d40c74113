fn main() {
    std::process::exit(weierstrass_sigma::cli::run(std::env::args_os()));
}

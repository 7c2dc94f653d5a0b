fn main() {
    std::process::exit(flips_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(slaq::cli::run(std::env::args_os()));
}

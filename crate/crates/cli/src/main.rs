fn main() {
    std::process::exit(keenjump::cli::run(std::env::args_os()));
}

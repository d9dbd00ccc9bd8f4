fn main() {
    std::process::exit(isoflag_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(salt_cli::dispatch(std::env::args_os()));
}

fn main() {
    std::process::exit(binmed_cli::run_from_args(std::env::args_os()));
}

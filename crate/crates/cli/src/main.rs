fn main() {
    std::process::exit(entropyflow_cli::dispatch(std::env::args_os()));
}

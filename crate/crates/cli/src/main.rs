fn main() {
    std::process::exit(isocode_cli::dispatch(std::env::args_os()));
}

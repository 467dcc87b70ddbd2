fn main() {
    std::process::exit(freqmeter::cli::main_with_args(std::env::args_os()));
}

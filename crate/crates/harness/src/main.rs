fn main() {
    std::process::exit(adrt_harness::cli::main_with_args(std::env::args_os()));
}

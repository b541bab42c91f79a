fn main() {
    std::process::exit(tofq::cli::main_with_args(std::env::args_os()));
}

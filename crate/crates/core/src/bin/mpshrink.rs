fn main() { std::process::exit(mpshrink::cli::main_with_args(std::env::args_os())) }

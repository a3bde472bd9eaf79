fn main() {
    std::process::exit(combined_pid::cli::main_with_args(std::env::args_os()));
}

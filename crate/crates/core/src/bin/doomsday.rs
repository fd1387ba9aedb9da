fn main() {
    std::process::exit(doomsday::cli::main_with_args(std::env::args_os()));
}

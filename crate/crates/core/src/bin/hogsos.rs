fn main() {
    std::process::exit(hogsos::cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(boardmap_cli::main_with(std::env::args_os()));
}

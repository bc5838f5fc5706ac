fn main() {
    std::process::exit(fgqa_cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(soliton_forge::cli::main_with_args(std::env::args_os()));
}

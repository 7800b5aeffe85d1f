fn main() {
    std::process::exit(rankaxis::cli::main_with_args(std::env::args_os()));
}

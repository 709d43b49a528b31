fn main() {
    std::process::exit(remshare::cli::main_with(std::env::args_os()));
}

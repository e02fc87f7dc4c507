fn main() {
    std::process::exit(fusion_gram::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(boolfpp::cli::main_with_args(std::env::args_os()));
}

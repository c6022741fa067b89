fn main() {
    std::process::exit(gentangle::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(docent::cli::main_with(std::env::args_os()));
}

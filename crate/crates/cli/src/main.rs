fn main() {
    std::process::exit(utm_cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(profit_rate::cli::main_with(std::env::args_os()));
}

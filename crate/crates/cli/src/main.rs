fn main() {
    std::process::exit(qnl_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(spa_cli::run_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(ftqc_cli::run(std::env::args_os()));
}

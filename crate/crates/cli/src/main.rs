fn main() {
    std::process::exit(qnm_cli::run(std::env::args_os()));
}

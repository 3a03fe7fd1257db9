fn main() {
    std::process::exit(cournot_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(slipcontact_cli::run(std::env::args_os()));
}

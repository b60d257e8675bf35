fn main() {
    std::process::exit(easyvoice::service::run_cli(std::env::args_os()));
}

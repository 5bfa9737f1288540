fn main() {
    std::process::exit(sbd_core::cli::main_with_args(std::env::args_os()));
}

fn main() {
    env_logger::init();
    std::process::exit(roughpath::cli::run(std::env::args_os()));
}

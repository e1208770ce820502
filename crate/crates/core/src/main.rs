fn main() {
    std::process::exit(hoprank::cli::run(std::env::args_os()));
}

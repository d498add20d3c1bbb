fn main() {
    std::process::exit(pcmkit::cli::run(std::env::args_os()));
}

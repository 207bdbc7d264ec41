fn main() {
    std::process::exit(morrey_harness::cli::run(std::env::args_os()));
}

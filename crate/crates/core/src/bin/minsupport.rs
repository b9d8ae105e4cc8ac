fn main() {
    std::process::exit(minsupport::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(isospec::cli::run(std::env::args_os()));
}

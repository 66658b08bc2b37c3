fn main() {
    std::process::exit(fockdens::cli::run());
}

fn main() {
    std::process::exit(tsvha::cli::execute(std::env::args_os()));
}

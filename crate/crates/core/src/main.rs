fn main() {
    std::process::exit(purisim::cli::run_cli());
}

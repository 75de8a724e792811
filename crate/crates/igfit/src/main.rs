fn main() {
    std::process::exit(igfit::cli::main_entry());
}

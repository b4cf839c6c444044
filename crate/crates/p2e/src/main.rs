fn main() { std::process::exit(p2e::cli::run()); }

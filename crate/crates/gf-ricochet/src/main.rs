fn main() { std::process::exit(gf_ricochet::cli::run(std::env::args())) }

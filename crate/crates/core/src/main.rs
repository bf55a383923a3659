fn main() {
    std::process::exit(pt_resonance::cli::run(std::env::args_os()));
}

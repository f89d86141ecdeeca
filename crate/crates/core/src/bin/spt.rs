fn main() {
    std::process::exit(spt_core::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(sliding_saddle::cli::run(std::env::args_os()));
}

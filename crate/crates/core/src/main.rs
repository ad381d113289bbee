fn main() {
    std::process::exit(hft_spectra::cli::run(std::env::args_os()));
}

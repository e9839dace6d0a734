fn main() {
    std::process::exit(deconv_cli::cli_main(std::env::args()));
}

fn main() {
    std::process::exit(parcel_sim::experiments::cli::cli_main(std::env::args_os()));
}

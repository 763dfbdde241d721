fn main() {
    std::process::exit(mhd_hho::cli::main_with_args(std::env::args_os()));
}

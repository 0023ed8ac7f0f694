fn main() {
    std::process::exit(gkls_thermo::cli::main_with_args(std::env::args_os()));
}

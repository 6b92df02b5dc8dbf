fn main() {
    std::process::exit(manifold_gfdm::cli::main_with_args(std::env::args_os().skip(1)));
}

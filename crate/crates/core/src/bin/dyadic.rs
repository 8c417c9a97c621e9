fn main() {
    std::process::exit(dyadic_cubes::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(maus_sim::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(simloc::run_command(std::env::args_os()));
}

fn main() {
    std::process::exit(frachill::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(normal_field_cli::run_cli(std::env::args_os()));
}

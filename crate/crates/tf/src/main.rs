fn main() {
    std::process::exit(tf_cli::run(std::env::args_os()));
}

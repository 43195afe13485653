fn main() {
    let code = alphamod_cli::run(std::env::args_os());
    std::process::exit(code);
}

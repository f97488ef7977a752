fn main() {
    let code = betagos_cli::run(std::env::args_os());
    std::process::exit(code);
}

fn main() -> std::process::ExitCode {
    relay_ia_cli::run(std::env::args_os())
}

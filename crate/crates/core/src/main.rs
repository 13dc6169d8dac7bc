fn main() -> std::process::ExitCode {
    powerflow::cli::run(std::env::args_os())
}

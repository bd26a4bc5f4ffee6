fn main() -> std::process::ExitCode {
    spine_rectify::cli::main_with_args(std::env::args_os())
}

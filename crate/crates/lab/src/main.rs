fn main() -> std::process::ExitCode {
    timereg_lab::cli::main()
}

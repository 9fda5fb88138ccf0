fn main() -> std::process::ExitCode {
    terdragon::cli::main()
}

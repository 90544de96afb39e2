fn main() -> std::process::ExitCode {
    dyncal::cli::main()
}

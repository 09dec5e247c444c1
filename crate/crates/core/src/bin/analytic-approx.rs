fn main() -> std::process::ExitCode {
    analytic_approx::cli::main()
}

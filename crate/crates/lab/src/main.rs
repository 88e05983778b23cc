fn main() -> std::process::ExitCode {
    hilbert_lab::cli::run()
}

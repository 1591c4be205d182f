fn main() -> std::process::ExitCode {
    metacode::cli::main_entry()
}

use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(msg) = jacprobe_cli::configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(jacprobe_cli::EXIT_USAGE as u8);
    }
    let outcome = jacprobe_cli::run(std::env::args_os());
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}

use std::process::ExitCode;

fn main() -> ExitCode {
    match nisim_cli::run(std::env::args()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

use warped_torsion::cli::{execute, parse_config, split_args, ExitStatus};

const USAGE: &str = "usage: warped-torsion [CONFIG] [--key value]...

CONFIG holds key=value lines; flags override it.
commands: radial, solve, verify, rigidity, sweep
exit codes: 0 success, 1 verdict failure, 2 invalid configuration, 3 solver did not converge";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let mut stderr = std::io::stderr();
    let status = match load(&args) {
        Ok(config) => execute(&config, std::io::stdout().lock(), &mut stderr),
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}\n{USAGE}");
            ExitStatus::ConfigError
        }
    };
    ExitCode::from(status.code() as u8)
}

fn load(args: &[String]) -> Result<warped_torsion::cli::RunConfig, String> {
    let (path, flags) = split_args(args).map_err(|e| e.to_string())?;
    let text = match &path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?,
        None => String::new(),
    };
    parse_config(&text, &flags).map_err(|e| match &path {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    })
}

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use hyperschur_cli::{exit, output, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::PASS,
                _ => exit::INPUT_ERROR,
            };
            return ExitCode::from(code as u8);
        }
    };
    let (task, args) = cli.command.parts();
    let result = RunConfig::from_args(task, args).and_then(|cfg| {
        let out = run(&cfg)?;
        match &cfg.out {
            Some(dir) => {
                for p in output::write_all(&out, dir)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            None => print!("{}", output::report_json(&out)?),
        }
        for v in out.report.verdicts.iter().filter(|v| !v.passed) {
            eprintln!("FAIL {} [{}]", v.check, v.domain);
        }
        Ok(out.report.exit_code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use regev_cli::{report, run, Cli, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli.config.out_dir.clone();
    match run(cli) {
        Ok((report, code)) => {
            let mut stdout = std::io::stdout().lock();
            let printed = match report.config.format {
                Format::Json => serde_json::to_vec_pretty(&report.summary).map_err(std::io::Error::from),
                Format::Csv => report::rows_to_csv(&report.rows),
            };
            if let Err(e) = printed.and_then(|bytes| {
                stdout.write_all(&bytes)?;
                writeln!(stdout)
            }) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            eprintln!("wrote {}", out_dir.join("report.json").display());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use rydmag_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli, &mut |line| eprintln!("{line}")) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!(
                "wrote {} files and {}",
                outcome.manifest.files.len(),
                cli.out.join(rydmag_cli::output::MANIFEST_FILE).display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;

use mbent_cli::{execute, resolve_config, write_table, Cli, CliError};

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let config = resolve_config(cli)?;
    let (manifest, result) = execute(cli.command, &config);
    match result {
        Ok(table) => write_table(&table, &manifest, &config),
        Err((Some(table), e)) => {
            write_table(&table, &manifest, &config)?;
            Err(e)
        }
        Err((None, e)) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbent: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

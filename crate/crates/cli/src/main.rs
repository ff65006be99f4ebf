use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use lif_cli::app::{parse_seed_override, run, Cli};
use lif_cli::CliError;

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut cli = Cli::parse();

    if let Ok(v) = std::env::var("LIF_SEED") {
        match parse_seed_override(&v) {
            Ok(seed) => cli.command.override_seed(seed),
            Err(e) => return fail(&e),
        }
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return fail(&CliError::validation("jobs must be at least 1"));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            return fail(&CliError::validation(format!("thread pool: {e}")));
        }
    }

    match run(&cli) {
        Ok(Some(out)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

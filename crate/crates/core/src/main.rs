use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oscifd::harness::{
    cmd_conserve, cmd_converge, cmd_defect, cmd_plan, cmd_run, parse_h_list, ExperimentConfig,
    Report, EXIT_ERROR,
};

#[derive(Parser)]
#[command(
    name = "oscifd",
    version,
    about = "Filtered finite differences for the semiclassical cubic NLS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides the configured path. Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct Sweep {
    #[command(flatten)]
    common: Common,
    /// Comma-separated mesh widths.
    #[arg(long, value_name = "H1,H2,...")]
    h_list: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve the discretization and print the stability report.
    Plan(Common),
    /// Integrate to the final time and write the final state.
    Run(Common),
    /// Errors over a list of mesh widths with fitted orders.
    Converge(Sweep),
    /// Mass and energy history.
    Conserve(Common),
    /// Defect of the dominant term at half the final time.
    Defect(Sweep),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Plan(c) | Command::Run(c) | Command::Conserve(c) => c,
            Command::Converge(s) | Command::Defect(s) => &s.common,
        }
    }
}

fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var("OSCIFD_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| format!("OSCIFD_THREADS must be a positive integer, got '{v}'")),
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli) -> Result<(Report, Option<PathBuf>), String> {
    let common = cli.command.common();
    let cfg = ExperimentConfig::load(&common.config).map_err(|e| e.to_string())?;
    let h_list = |s: &Sweep| -> Result<Vec<f64>, String> {
        s.h_list
            .as_deref()
            .map(parse_h_list)
            .transpose()
            .map(Option::unwrap_or_default)
            .map_err(|e| e.to_string())
    };
    let report = match &cli.command {
        Command::Plan(_) => cmd_plan(&cfg),
        Command::Run(_) => cmd_run(&cfg),
        Command::Converge(s) => cmd_converge(&cfg, &h_list(s)?),
        Command::Conserve(_) => cmd_conserve(&cfg),
        Command::Defect(s) => cmd_defect(&cfg, &h_list(s)?),
    }
    .map_err(|e| e.to_string())?;
    Ok((report, common.output.clone().or(cfg.output.path.clone())))
}

fn emit(report: &Report, output: Option<PathBuf>, quiet: bool, plan: bool) -> Result<(), String> {
    if let Some(csv) = &report.csv {
        match output {
            Some(path) => std::fs::write(&path, csv)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
            None => std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| e.to_string())?,
        }
    }
    if plan {
        print!("{}", report.summary);
    } else if !quiet {
        eprint!("{}", report.summary);
    }
    Ok(())
}

/// Runs one command and returns the process exit code.
fn run_cli(cli: &Cli, threads: Option<usize>) -> u8 {
    let quiet = cli.command.common().quiet;
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| e.to_string())
        .and_then(|pool| pool.install(|| execute(cli)))
        .and_then(|(report, output)| {
            emit(
                &report,
                output,
                quiet,
                matches!(cli.command, Command::Plan(_)),
            )?;
            Ok(report.exit_code)
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.command.common().quiet;
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet {
        "error"
    } else {
        "warn"
    }))
    .init();
    let code = match thread_count() {
        Ok(threads) => run_cli(&cli, threads),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code)
}

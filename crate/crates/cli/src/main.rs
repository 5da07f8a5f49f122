use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagvar_cli::{compare_report, run_experiment, summary_table, CliError, Settings};

#[derive(Parser)]
#[command(name = "lagvar", version, about = "Lag-window long-run variance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write running estimates, per-seed rows and a summary.
    Run(RunArgs),
    /// Compare the intervals of two summary files (e.g. plain vs adaptive).
    Compare {
        left: PathBuf,
        right: PathBuf,
        /// Print the comparison as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// garch, logistic-plain, logistic-adaptive or synthetic-oracle.
    #[arg(long)]
    experiment: Option<String>,
    /// bartlett, parzen or power:q.
    #[arg(long)]
    kernel: Option<String>,
    /// fixed:delta=..,coef=.. | nw:c0=.. | explicit:b=..
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Checkpoint spacing of the running estimates.
    #[arg(long)]
    stride: Option<usize>,
    /// A seed, a list `1,2,3` or a range `1-20`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only compute final estimates.
    #[arg(long)]
    no_running: bool,
    /// Extra `key=value` settings, e.g. `--set phi=0.9`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    extra: Vec<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut settings = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        for item in &self.extra {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{item}`")))?;
            flags.set(k, v.trim())?;
        }
        let pairs = [
            ("experiment", self.experiment.clone()),
            ("kernel", self.kernel.clone()),
            ("bandwidth", self.bandwidth.clone()),
            ("n_iter", self.n_iter.map(|v| v.to_string())),
            ("burn_in", self.burn_in.map(|v| v.to_string())),
            ("stride", self.stride.map(|v| v.to_string())),
            ("seeds", self.seeds.clone()),
            ("level", self.level.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("running", self.no_running.then(|| "false".to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v)?;
            }
        }
        settings.merge(&flags);
        Ok(settings)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = args.settings()?.resolve()?;
            let summary = run_experiment(&config)?;
            print!("{}", summary_table(&summary));
            println!("results written to {}", config.out.display());
        }
        Command::Compare { left, right, json } => {
            let comparison = compare_report(&left, &right)?;
            if json {
                let text = serde_json::to_string_pretty(&comparison).map_err(|e| CliError::Runtime(e.to_string()))?;
                println!("{text}");
            } else {
                print!("{}", comparison.render());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use branchcount::runner::{
    list_scenarios, run, sweep, sweep_csv, sweep_json, write_output, ErrorKind, ErrorRecord,
    ExperimentConfig, OutputFormat, EXIT_NUMERIC,
};
use branchcount::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "branchcount", version, about = "Branch counting on decoherent histories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run(Common),
    /// Run a config once per value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `rule`, `tau_sq`, `seed` or `params.<name>`.
        #[arg(long)]
        param: String,
        /// JSON array of values.
        #[arg(long)]
        values: String,
    },
    /// Print the scenario catalog with parameter schemas.
    List,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Write here instead of the config's output path (or stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut config = ExperimentConfig::from_path(&self.config)?;
        if let Some(out) = &self.out {
            config.output.path = Some(out.clone());
        }
        if let Some(f) = self.format {
            config.output.format = match f {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

fn emit(text: &str, config: &ExperimentConfig) -> Result<(), Error> {
    match &config.output.path {
        Some(path) => write_output(path, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::List => {
            let catalog = serde_json::to_string_pretty(&list_scenarios())?;
            println!("{catalog}");
            Ok(0)
        }
        Command::Run(common) => {
            let config = common.load()?;
            let envelope = run(&config)?;
            if config.output.path.is_none() {
                emit(&envelope.render(config.output.format)?, &config)?;
            }
            Ok(0)
        }
        Command::Sweep { common, param, values } => {
            let config = common.load()?;
            let values: Vec<Value> = serde_json::from_str(&values)
                .map_err(|e| Error::Config { path: "--values".into(), message: e.to_string() })?;
            let envelopes = sweep(&config, &param, &values)?;
            let text = match config.output.format {
                OutputFormat::Json => sweep_json(&envelopes),
                OutputFormat::Csv => sweep_csv(&param, &values, &envelopes),
            };
            emit(&text, &config)?;
            let failed: Vec<&ErrorRecord> = envelopes.iter().filter_map(|e| e.error.as_ref()).collect();
            for e in &failed {
                eprintln!("{}", serde_json::json!({ "error": e }));
            }
            Ok(if failed.is_empty() { 0 } else { EXIT_NUMERIC as u8 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let record = ErrorRecord::from(&err);
            eprintln!("{}", serde_json::json!({ "error": record }));
            ExitCode::from(ErrorKind::of(&err).exit_code() as u8)
        }
    }
}

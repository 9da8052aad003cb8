use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symma::catalog::CATALOG;
use symma::cli::{self, Overrides, RunConfig, Task};

#[derive(Parser)]
#[command(name = "symma", version, about = "Invariant Monge-Ampere equations on symmetric spaces")]
struct Args {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a TOML configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        task: Option<Task>,
        #[arg(long)]
        space: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the shipped spaces.
    Spaces,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match args.command {
        Command::Spaces => {
            for name in CATALOG {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            task,
            space,
            out,
            seed,
        } => {
            let overrides = Overrides { task, space, out, seed };
            match run(&config, &overrides) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn run(path: &PathBuf, overrides: &Overrides) -> Result<bool, cli::CliError> {
    let mut cfg = RunConfig::load(path)?;
    overrides.apply(&mut cfg);
    let mut report = cli::run(&cfg)?;
    report.write(&cfg.output.dir)?;
    print!("{}", report.to_text());
    Ok(report.pass)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvkan::explain::DEFAULT_RESOLUTION;
use cvkan_cli::suite::{run_suite, write_suite, SuiteId, SuiteOptions};
use cvkan_cli::{
    cmd_eval, cmd_export_viz, cmd_params, cmd_train, CliError, CliResult, ExportOptions, Overrides, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "cvkan", version, about = "Train and inspect complex-valued Kolmogorov-Arnold networks")]
struct Cli {
    /// Directory for run artifacts.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "runs")]
    out_dir: PathBuf,

    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            seed: a.seed,
            epochs: a.epochs,
            folds: a.folds,
            batch_size: a.batch_size,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate an experiment config and save its artifacts.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Evaluate a saved model on the dataset of a config.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Print the trainable parameter count of a config's model.
    Params {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the viewer document: relevance scores and edge surfaces.
    ExportViz {
        #[arg(long)]
        model: PathBuf,
        /// Config whose dataset the relevance scores are computed on.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        max_samples: Option<usize>,
        /// Output file; defaults to `<out-dir>/viz.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a predefined sweep and write a results table.
    Suite {
        #[arg(value_enum)]
        id: SuiteId,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Samples per synthetic dataset or knot subset size.
        #[arg(long)]
        samples: Option<usize>,
        /// Knot invariant table; a synthetic stand-in is used without it.
        #[arg(long)]
        knots_csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { config, overrides } => {
            let artifacts = cmd_train(&config, &overrides.into(), &cli.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&artifacts.summary.summary).unwrap_or_default());
            println!("params={} artifacts={}", artifacts.summary.params, artifacts.dir.display());
        }
        Command::Eval {
            model,
            config,
            overrides,
        } => {
            let metrics = cmd_eval(&model, &config, &overrides.into())?;
            println!("{}", serde_json::to_string_pretty(&metrics).unwrap_or_default());
        }
        Command::Params { config } => println!("{}", cmd_params(&config)?),
        Command::ExportViz {
            model,
            config,
            resolution,
            max_samples,
            out,
        } => {
            let out = out.unwrap_or_else(|| cli.out_dir.join("viz.json"));
            let options = ExportOptions {
                resolution,
                max_samples,
            };
            let doc = cmd_export_viz(&model, &config, &options, &out)?;
            println!("{} surfaces written to {}", doc.surfaces.len(), out.display());
        }
        Command::Suite {
            id,
            seed,
            epochs,
            folds,
            batch_size,
            samples,
            knots_csv,
        } => {
            let options = SuiteOptions {
                seed,
                epochs,
                folds,
                batch_size,
                samples,
                knots_csv,
            };
            let report = run_suite(id, &options);
            let dir = write_suite(&report, &cli.out_dir)?;
            print!("{}", cvkan_cli::suite::render_table(&report));
            println!("artifacts={}", dir.display());
            let failures = report.failures();
            if failures > 0 {
                return Err(CliError::Runtime(format!("{failures} suite cells failed or diverged")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `spdc-comb`: simulate and analyze comb-like SPDC spectra of biPPLN superlattices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "spdc-comb", version, about = "SPDC comb spectra of bi-periodically poled lithium niobate")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Run configuration (JSON); a run_manifest.json is accepted too.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set design.n_gap=21 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for grid evaluation; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Collinear spectrum, comb statistics and run manifest.
    Simulate,
    /// Wavelength–angle map and an angular cross-section.
    Map2d,
    /// Collinear spectra over temperatures with envelope-center shifts.
    SweepTemperature {
        /// Comma-separated temperatures in °C (default: sweep_temperatures_c).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        temperatures: Option<Vec<f64>>,
    },
    /// Check a design file and print derived lengths and predictions.
    Validate {
        /// Design JSON: a bare design or a config with a `design` key.
        design: PathBuf,
    },
    /// Render CSV artifacts to PNG.
    Plot {
        /// spectrum, cross-section or map CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Image path (single input only); defaults to the input with .png.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Plot only this column of a line CSV.
        #[arg(long)]
        column: Option<String>,
        /// Reference spectrum CSV overlaid on line plots.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let cfg = config::resolve(g.config.as_deref(), &g.sets, g.out.as_deref())?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Map2d => commands::map2d(&cfg),
        Command::SweepTemperature { temperatures } => commands::sweep_temperature(&cfg, temperatures),
        Command::Validate { design } => commands::validate_design(&cfg, &design),
        Command::Plot {
            inputs,
            output,
            column,
            reference,
            title,
        } => {
            if output.is_some() && inputs.len() > 1 {
                return Err(CliError::Config("--output needs exactly one input".into()));
            }
            for input in &inputs {
                let png = commands::png_path(input, output.as_ref());
                if plot::is_map(input)? {
                    plot::heatmap(input, &png, title.as_deref())?;
                } else {
                    plot::line_plot(input, &png, column.as_deref(), reference.as_deref(), title.as_deref())?;
                }
                log::info!("wrote {}", png.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.global.threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Runtime(format!("thread pool: {e}"))),
        },
        Some(_) => Err(CliError::Parse("--threads must be at least 1".into())),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

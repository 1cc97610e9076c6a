//! Command-line front end for the `vesseleval` toolkit.
//!
//! Exit codes: 0 on success, 1 when the input is readable but invalid
//! (violations, bad plan, table shape mismatch), 2 on I/O, syntax or
//! evaluation failures.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;
use vesseleval::annotation::UnknownLabelPolicy;
use vesseleval::metrics::{MetricsError, ReportConfig};
use vesseleval::{ParseError, Taxonomy, ValidationOptions};

pub mod dataset;
pub mod evaluate;
pub mod render;
pub mod synth;
pub mod tables;
pub mod validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Metrics { path: PathBuf, source: MetricsError },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn parse(path: &Path, source: ParseError) -> Self {
        CliError::Parse {
            path: path.to_owned(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vesseleval", version, about = "Validate, evaluate and report on vessel scene annotations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every scene document in a directory.
    Validate {
        dir: PathBuf,
        /// Report labels outside the taxonomy as warnings instead of violations.
        #[arg(long)]
        allow_unknown_labels: bool,
    },
    /// Score predictions against ground truth, pairing files by name.
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Also score vessel content separately inside each vessel.
        #[arg(long)]
        per_vessel: bool,
        /// Also score relationships between vessels.
        #[arg(long)]
        relations: bool,
        #[arg(long, env = evaluate::WORKERS_ENV, default_value_t = 1)]
        workers: usize,
        /// Write metrics.json and CSV tables here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = evaluate::OutputFormat::Structured)]
        format: evaluate::OutputFormat,
    },
    /// Write synthetic ground truth, perturbed predictions and expected counters.
    Generate {
        /// JSON plan; missing fields take their defaults.
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a scene as a PNG overlay.
    Render {
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one of the fixed table layouts from a metrics file.
    Report {
        metrics: PathBuf,
        #[arg(long, value_enum)]
        shape: tables::Shape,
        #[arg(long, value_enum, default_value_t = tables::TableFormat::Markdown)]
        format: tables::TableFormat,
    },
}

/// Runs one command, writing results to `out` and diagnostics to `err`.
pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let stdout_err = |e| CliError::io(Path::new("<stdout>"), e);
    match command {
        Command::Validate {
            dir,
            allow_unknown_labels,
        } => {
            let opts = ValidationOptions {
                taxonomy: Taxonomy::standard(),
                unknown_labels: if allow_unknown_labels {
                    UnknownLabelPolicy::Warn
                } else {
                    UnknownLabelPolicy::Error
                },
            };
            Ok(validate::validate_dir(&dir, &opts, out)?.exit_code())
        }
        Command::Evaluate {
            gt,
            pred,
            per_vessel,
            relations,
            workers,
            out: out_dir,
            format,
        } => {
            let config = ReportConfig { per_vessel, relations };
            let eval = evaluate::evaluate_dirs(&gt, &pred, config, workers)?;
            for w in &eval.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let doc = evaluate::MetricsDocument::new(eval.report);
            if let Some(dir) = out_dir {
                evaluate::write_outputs(&dir, &doc)?;
            }
            out.write_all(evaluate::render(&doc, format).as_bytes()).map_err(stdout_err)?;
            Ok(EXIT_OK)
        }
        Command::Generate { plan, out: out_dir } => {
            let bytes = dataset::read_file(&plan)?;
            let plan: synth::SyntheticPlan = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", plan.display())))?;
            let set = synth::generate(&plan)?;
            synth::write_set(&out_dir, &plan, &set)?;
            writeln!(out, "{} scenes written to {}", set.scenes.len(), out_dir.display()).map_err(stdout_err)?;
            Ok(EXIT_OK)
        }
        Command::Render { scene, out: image } => {
            let (scene, _) = match dataset::load_scene(&scene, &ValidationOptions::default()) {
                Ok(s) => s,
                // an unreadable file is an I/O failure; anything that reads but
                // is not a valid scene is an invalid input
                Err(CliError::Parse { path, source }) => {
                    return Err(CliError::Invalid(format!("{}: {source}", path.display())))
                }
                Err(e) => return Err(e),
            };
            render::render_to(&scene, &image)?;
            Ok(EXIT_OK)
        }
        Command::Report { metrics, shape, format } => {
            let bytes = dataset::read_file(&metrics)?;
            let doc = evaluate::MetricsDocument::from_bytes(&metrics, &bytes)?;
            let table = tables::shaped_table(&doc.summary, shape, &Taxonomy::standard())?;
            let text = match format {
                tables::TableFormat::Markdown => table.to_markdown(),
                tables::TableFormat::Csv => table.to_csv(),
            };
            out.write_all(text.as_bytes()).map_err(stdout_err)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

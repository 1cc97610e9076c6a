use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vesseleval::metrics::{evaluate_scene, MetricReport, ReportConfig, ReportSummary};
use vesseleval::ValidationOptions;

use crate::dataset::{list_documents, load_prediction, load_scene, write_bytes};
use crate::tables::{self, Table};
use crate::CliError;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "VESSELEVAL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Structured,
    Csv,
    Markdown,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gt_dir: PathBuf,
    pub pred_dir: PathBuf,
    pub report: ReportConfig,
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: MetricReport,
    /// Non-fatal problems, in file name order.
    pub warnings: Vec<String>,
}

/// The structured metrics file: raw counters plus the scores derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub counters: MetricReport,
    pub summary: ReportSummary,
}

impl MetricsDocument {
    pub fn new(counters: MetricReport) -> Self {
        let summary = counters.summary();
        Self { counters, summary }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("metrics serialize");
        out.push(b'\n');
        out
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self, CliError> {
        // the summary is always recomputed from the counters
        #[derive(Deserialize)]
        struct Counters {
            counters: MetricReport,
        }
        let doc: Counters = serde_json::from_slice(bytes)
            .map_err(|e| CliError::Invalid(format!("{}: not a metrics file: {e}", path.display())))?;
        Ok(Self::new(doc.counters))
    }
}

/// Evaluates every ground-truth document against the prediction with the
/// same file name. Scenes are evaluated on `workers` threads; the per-scene
/// reports are folded in file name order, so the result does not depend on
/// the worker count.
pub fn evaluate_dirs(gt_dir: &Path, pred_dir: &Path, config: ReportConfig, workers: usize) -> Result<Evaluation, CliError> {
    if workers == 0 {
        return Err(CliError::Invalid("worker count must be at least 1".into()));
    }
    let gt_names = list_documents(gt_dir)?;
    let pred_names: BTreeSet<String> = list_documents(pred_dir)?.into_iter().collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start {workers} workers: {e}")))?;
    let opts = ValidationOptions::default();
    let results: Vec<Result<(MetricReport, Option<String>), CliError>> = pool.install(|| {
        gt_names
            .par_iter()
            .map(|name| {
                let gt_path = gt_dir.join(name);
                let (gt, _) = load_scene(&gt_path, &opts)?;
                let (pred, warning) = if pred_names.contains(name) {
                    (Some(load_prediction(&pred_dir.join(name))?), None)
                } else {
                    (None, Some(format!("{name}: no prediction, counted as all false negatives")))
                };
                let report = evaluate_scene(&gt, pred.as_ref(), config).map_err(|e| CliError::Metrics {
                    path: pred_dir.join(name),
                    source: e,
                })?;
                Ok((report, warning))
            })
            .collect()
    });

    let mut report = MetricReport::empty(config);
    let mut warnings = Vec::new();
    for r in results {
        let (one, warning) = r?;
        report.merge(&one).expect("scene reports share the run configuration");
        warnings.extend(warning);
    }
    let gt_set: BTreeSet<&String> = gt_names.iter().collect();
    for name in pred_names.iter().filter(|n| !gt_set.contains(n)) {
        warnings.push(format!("{name}: prediction without ground truth, ignored"));
    }
    Ok(Evaluation { report, warnings })
}

/// Writes `metrics.json` and one CSV file per table into `dir`.
pub fn write_outputs(dir: &Path, doc: &MetricsDocument) -> Result<(), CliError> {
    write_bytes(&dir.join("metrics.json"), &doc.to_bytes())?;
    for (name, table) in summary_tables(&doc.summary) {
        write_bytes(&dir.join(format!("{name}.csv")), table.to_csv().as_bytes())?;
    }
    Ok(())
}

/// Every table of a summary, keyed by file stem.
pub fn summary_tables(summary: &ReportSummary) -> Vec<(&'static str, Table)> {
    let mut out = vec![
        ("panoptic", tables::panoptic_table(summary)),
        ("semantic", tables::semantic_table(summary)),
    ];
    if let Some(t) = tables::relations_table(summary) {
        out.push(("relations", t));
    }
    if let Some(pv) = &summary.per_vessel {
        out.push(("per_vessel_panoptic", tables::vessel_panoptic_table(pv)));
        out.push(("per_vessel_semantic", tables::vessel_semantic_table(pv)));
    }
    out
}

/// What `evaluate` prints on standard output.
pub fn render(doc: &MetricsDocument, format: OutputFormat) -> String {
    match format {
        OutputFormat::Structured => String::from_utf8(doc.to_bytes()).expect("json is utf-8"),
        OutputFormat::Csv => summary_tables(&doc.summary)
            .into_iter()
            .map(|(name, t)| format!("# {name}\n{}", t.to_csv()))
            .collect::<Vec<_>>()
            .join("\n"),
        OutputFormat::Markdown => summary_tables(&doc.summary)
            .into_iter()
            .map(|(_, t)| t.to_markdown())
            .collect::<Vec<_>>()
            .join("\n"),
    }
}


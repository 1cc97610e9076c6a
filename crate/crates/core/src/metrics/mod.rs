//! Evaluation metrics with mergeable raw counters.
//!
//! Undefined ratios (zero denominators) are `None` throughout and are
//! skipped by every average; they are never coerced to 0 or 1.

mod panoptic;
mod relations;
mod report;
mod semantic;
mod vessel;

use thiserror::Error;

use crate::annotation::HierarchyError;
use crate::mask::MaskError;

pub use panoptic::{
    class_agnostic_panoptic, panoptic_counters, panoptic_metrics, split_false_positives, with_class_panoptic,
    AgnosticCounters, AgnosticCounts, ClassCounts, IouSum, PanopticCounters, PanopticScores,
};
pub use relations::{empty_relation_counters, relationship_metrics, RelationClass, RelationCounters, RelationCounts, RelationScores};
pub use report::{
    aggregate_reports, evaluate_scene, MetricReport, PanopticRow, RelationRow, ReportConfig, ReportSummary,
    SemanticRow, VesselPanopticRow, VesselSemanticRow, VesselSummary,
};
pub use semantic::{semantic_maps, semantic_metrics, PixelCounts, SemanticCounters, SemanticScores};
pub use vessel::{per_vessel_content_eval, MacroMean, MacroPanoptic, MacroSemantic, PerVesselReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error("class fractions must be finite and non-negative, got {value} for '{label}'")]
    InvalidFraction { label: String, value: f64 },
    #[error("class fractions sum to {sum}, expected 1")]
    FractionsNotNormalized { sum: f64 },
    #[error("prediction content keyed by '{0}', which is not a ground-truth vessel")]
    UnknownVessel(String),
    #[error("relation {kind}({subject}, {object}) references an id outside the evaluated vessel set")]
    RelationEndpoint {
        kind: String,
        subject: String,
        object: String,
    },
    #[error("relation {kind}({subject}, {object}) has no reciprocal {reciprocal}({object}, {subject})")]
    AsymmetricRelation {
        kind: String,
        reciprocal: String,
        subject: String,
        object: String,
    },
    #[error("cannot merge reports with different configurations")]
    ConfigMismatch,
    #[error("prediction image is {pred_width}x{pred_height} but ground truth is {gt_width}x{gt_height}")]
    ImageSize {
        gt_width: u32,
        gt_height: u32,
        pred_width: u32,
        pred_height: u32,
    },
}

/// `num / den`, or `None` when the denominator is zero.
pub fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

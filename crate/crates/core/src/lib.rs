//! Annotation model and evaluation toolkit for hierarchical vessel and
//! material scenes.
//!
//! * [`mask`] run-length encoded binary masks and their set algebra
//! * [`annotation`] scene documents, validation and containment queries
//! * [`matching`] IOU matrices, panoptic matching and Hungarian assignment
//! * [`metrics`] semantic, panoptic, per-vessel and relationship metrics
//! * [`loss`] reference implementation of the matching-based training losses
//!
//! The loss and assignment code is generic over the scalar type; the aliases
//! at the crate root fix it to `f64`.

pub mod annotation;
pub mod loss;
pub mod mask;
pub mod matching;
pub mod metrics;
pub mod scalar;
pub mod taxonomy;

pub use annotation::{
    decode_scene, direct_content_of, parse_scene, parse_scene_with, serialize_scene, validate_scene,
    validate_scene_with, Instance, ParseError, Relation, RelationKind, SceneAnnotation, ValidationOptions,
    Violation, ViolationCode,
};
pub use mask::{BinaryMask, MaskError};
pub use scalar::{Cost, Scalar};
pub use taxonomy::{labels, ClassLabel, InstanceKind, LabelSet, Taxonomy};

pub type LogitPair = loss::LogitPair<f64>;
pub type ProbabilityMap = loss::ProbabilityMap<f64>;
pub type CostMatrix = matching::CostMatrix<f64>;
pub type Assignment = matching::Assignment<f64>;

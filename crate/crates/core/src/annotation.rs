//! Scene annotations: instances, relations, the document format and its
//! validator, and containment-hierarchy queries.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::BinaryMask;
use crate::taxonomy::{Group, InstanceKind, LabelSet, Taxonomy};

pub const FORMAT_VERSION: &str = "1.0";
pub const MASK_FORMAT: &str = "rle_v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub kind: InstanceKind,
    pub mask: BinaryMask,
    pub classes: LabelSet,
    pub properties: LabelSet,
    /// Material or part deliberately not placed inside any vessel.
    pub free_standing: bool,
}

impl Instance {
    pub fn new(id: impl Into<String>, kind: InstanceKind, mask: BinaryMask, classes: LabelSet) -> Self {
        Self {
            id: id.into(),
            kind,
            mask,
            classes,
            properties: LabelSet::new(),
            free_standing: false,
        }
    }

    pub fn with_properties(mut self, properties: LabelSet) -> Self {
        self.properties = properties;
        self
    }

    pub fn with_free_standing(mut self, free_standing: bool) -> Self {
        self.free_standing = free_standing;
        self
    }

    /// Classes and properties together; the label set metrics are keyed by.
    pub fn eval_labels(&self) -> LabelSet {
        self.classes.union(&self.properties).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Inside,
    Contain,
    Linked,
}

impl RelationKind {
    pub const ALL: [RelationKind; 3] = [RelationKind::Inside, RelationKind::Contain, RelationKind::Linked];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Inside => "inside",
            RelationKind::Contain => "contain",
            RelationKind::Linked => "linked",
        }
    }

    /// Kind that must hold with subject and object swapped.
    pub fn reciprocal(self) -> RelationKind {
        match self {
            RelationKind::Inside => RelationKind::Contain,
            RelationKind::Contain => RelationKind::Inside,
            RelationKind::Linked => RelationKind::Linked,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub kind: RelationKind,
    pub subject: String,
    pub object: String,
}

impl Relation {
    pub fn new(kind: RelationKind, subject: impl Into<String>, object: impl Into<String>) -> Self {
        Self {
            kind,
            subject: subject.into(),
            object: object.into(),
        }
    }

    pub fn reciprocal(&self) -> Relation {
        Relation::new(self.kind.reciprocal(), self.object.clone(), self.subject.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneAnnotation {
    pub width: u32,
    pub height: u32,
    pub instances: Vec<Instance>,
    pub relations: Vec<Relation>,
    /// Free-text provenance, stored as `image.file`.
    pub source: Option<String>,
}

impl SceneAnnotation {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            instances: Vec::new(),
            relations: Vec::new(),
            source: None,
        }
    }

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn vessels(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| i.kind == InstanceKind::Vessel)
    }

    pub fn push(&mut self, instance: Instance) -> &mut Self {
        self.instances.push(instance);
        self
    }

    /// Records `inner` inside `outer` together with the dual `contain`.
    pub fn place_inside(&mut self, inner: &str, outer: &str) -> &mut Self {
        self.relations.push(Relation::new(RelationKind::Inside, inner, outer));
        self.relations.push(Relation::new(RelationKind::Contain, outer, inner));
        self
    }

    /// Records a symmetric link between two vessels.
    pub fn link(&mut self, a: &str, b: &str) -> &mut Self {
        self.relations.push(Relation::new(RelationKind::Linked, a, b));
        self.relations.push(Relation::new(RelationKind::Linked, b, a));
        self
    }

    /// Instances sorted by id and relations sorted and deduplicated; the
    /// order documents are written in.
    pub fn canonicalize(&mut self) {
        self.instances.sort_by(|a, b| a.id.cmp(&b.id));
        self.relations.sort();
        self.relations.dedup();
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    fn inside_index(&self) -> HashMap<&str, BTreeSet<&str>> {
        let mut idx: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        for r in &self.relations {
            if r.kind == RelationKind::Inside {
                idx.entry(r.subject.as_str()).or_default().insert(r.object.as_str());
            }
        }
        idx
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    EmptyId,
    DuplicateId,
    InvalidMask,
    MaskDimensions,
    UnknownLabel,
    TaxonomyClosure,
    KindMismatch,
    SelfRelation,
    DanglingEndpoint,
    DuplicateRelation,
    MissingReciprocal,
    LinkedNonVessel,
    InsideCycle,
    Unanchored,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyId => "empty_id",
            ViolationCode::DuplicateId => "duplicate_id",
            ViolationCode::InvalidMask => "invalid_mask",
            ViolationCode::MaskDimensions => "mask_dimensions",
            ViolationCode::UnknownLabel => "unknown_label",
            ViolationCode::TaxonomyClosure => "taxonomy_closure",
            ViolationCode::KindMismatch => "kind_mismatch",
            ViolationCode::SelfRelation => "self_relation",
            ViolationCode::DanglingEndpoint => "dangling_endpoint",
            ViolationCode::DuplicateRelation => "duplicate_relation",
            ViolationCode::MissingReciprocal => "missing_reciprocal",
            ViolationCode::LinkedNonVessel => "linked_non_vessel",
            ViolationCode::InsideCycle => "inside_cycle",
            ViolationCode::Unanchored => "unanchored",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub ids: Vec<String>,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, ids: Vec<String>, message: String) -> Self {
        Self { code, ids, message }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} ({})", self.code.as_str(), self.message, self.ids.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownLabelPolicy {
    #[default]
    Error,
    Warn,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationOptions {
    pub taxonomy: Taxonomy,
    pub unknown_labels: UnknownLabelPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

/// All invariant violations of `scene` under the standard taxonomy.
pub fn validate_scene(scene: &SceneAnnotation) -> Vec<Violation> {
    validate_scene_with(scene, &ValidationOptions::default()).violations
}

pub fn validate_scene_with(scene: &SceneAnnotation, opts: &ValidationOptions) -> Validation {
    let mut out = Validation::default();
    let v = &mut out.violations;
    let tax = &opts.taxonomy;

    let mut kinds: HashMap<&str, InstanceKind> = HashMap::new();
    for inst in &scene.instances {
        if inst.id.is_empty() {
            v.push(Violation::new(ViolationCode::EmptyId, vec![], "instance with empty id".into()));
        }
        if kinds.insert(inst.id.as_str(), inst.kind).is_some() {
            v.push(Violation::new(
                ViolationCode::DuplicateId,
                vec![inst.id.clone()],
                format!("instance id '{}' is used more than once", inst.id),
            ));
        }
        if inst.mask.width() != scene.width || inst.mask.height() != scene.height {
            v.push(Violation::new(
                ViolationCode::MaskDimensions,
                vec![inst.id.clone()],
                format!(
                    "mask is {}x{} but the image is {}x{}",
                    inst.mask.width(),
                    inst.mask.height(),
                    scene.width,
                    scene.height
                ),
            ));
        }
        check_labels(inst, tax, opts.unknown_labels, v, &mut out.warnings);
    }

    let v = &mut out.violations;
    let present: HashSet<&Relation> = scene.relations.iter().collect();
    let mut seen = HashSet::new();
    let mut linked_reported = HashSet::new();
    for r in &scene.relations {
        let ids = vec![r.subject.clone(), r.object.clone()];
        if !seen.insert(r) {
            v.push(Violation::new(
                ViolationCode::DuplicateRelation,
                ids,
                format!("{}({}, {}) appears more than once", r.kind, r.subject, r.object),
            ));
            continue;
        }
        if r.subject == r.object {
            v.push(Violation::new(
                ViolationCode::SelfRelation,
                ids,
                format!("{} relation of '{}' with itself", r.kind, r.subject),
            ));
            continue;
        }
        let missing: Vec<&String> = [&r.subject, &r.object]
            .into_iter()
            .filter(|id| !kinds.contains_key(id.as_str()))
            .collect();
        if !missing.is_empty() {
            v.push(Violation::new(
                ViolationCode::DanglingEndpoint,
                ids,
                format!(
                    "{}({}, {}) references unknown instance(s) {}",
                    r.kind,
                    r.subject,
                    r.object,
                    missing.iter().map(|s| format!("'{s}'")).collect::<Vec<_>>().join(", ")
                ),
            ));
            continue;
        }
        let dual = r.reciprocal();
        if !present.contains(&dual) {
            v.push(Violation::new(
                ViolationCode::MissingReciprocal,
                ids.clone(),
                format!(
                    "{}({}, {}) has no reciprocal {}({}, {})",
                    r.kind, r.subject, r.object, dual.kind, dual.subject, dual.object
                ),
            ));
        }
        if r.kind == RelationKind::Linked {
            let both_vessels = kinds[r.subject.as_str()] == InstanceKind::Vessel
                && kinds[r.object.as_str()] == InstanceKind::Vessel;
            let pair = if r.subject < r.object {
                (r.subject.as_str(), r.object.as_str())
            } else {
                (r.object.as_str(), r.subject.as_str())
            };
            if !both_vessels && linked_reported.insert(pair) {
                v.push(Violation::new(
                    ViolationCode::LinkedNonVessel,
                    vec![pair.0.to_owned(), pair.1.to_owned()],
                    format!("linked relation between '{}' and '{}' which are not both vessels", pair.0, pair.1),
                ));
            }
        }
    }

    // inside restricted to vessels must be acyclic
    let mut graph = DiGraph::<&str, ()>::new();
    let mut nodes = BTreeMap::new();
    for inst in scene.vessels() {
        nodes.entry(inst.id.as_str()).or_insert_with(|| graph.add_node(inst.id.as_str()));
    }
    for r in &scene.relations {
        if r.kind != RelationKind::Inside || r.subject == r.object {
            continue;
        }
        if let (Some(&a), Some(&b)) = (nodes.get(r.subject.as_str()), nodes.get(r.object.as_str())) {
            graph.update_edge(a, b, ());
        }
    }
    let mut cycles: Vec<Vec<String>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1)
        .map(|scc| {
            let mut ids: Vec<String> = scc.iter().map(|&n| graph[n].to_owned()).collect();
            ids.sort();
            ids
        })
        .collect();
    cycles.sort();
    for ids in cycles {
        v.push(Violation::new(
            ViolationCode::InsideCycle,
            ids.clone(),
            format!("vessels {} are inside each other in a cycle", ids.join(" -> ")),
        ));
    }

    let inside = scene.inside_index();
    for inst in &scene.instances {
        if inst.kind == InstanceKind::Vessel || inst.free_standing {
            continue;
        }
        let anchored = inside.get(inst.id.as_str()).is_some_and(|outer| {
            outer
                .iter()
                .any(|o| kinds.get(o) == Some(&InstanceKind::Vessel))
        });
        if !anchored {
            v.push(Violation::new(
                ViolationCode::Unanchored,
                vec![inst.id.clone()],
                format!(
                    "{} '{}' is not inside any vessel and is not marked free-standing",
                    inst.kind, inst.id
                ),
            ));
        }
    }
    out
}

fn check_labels(
    inst: &Instance,
    tax: &Taxonomy,
    policy: UnknownLabelPolicy,
    violations: &mut Vec<Violation>,
    warnings: &mut Vec<Violation>,
) {
    for (set, want_property) in [(&inst.classes, false), (&inst.properties, true)] {
        let what = if want_property { "property" } else { "class" };
        for label in set {
            let Some(group) = tax.group(label.as_str()) else {
                let viol = Violation::new(
                    ViolationCode::UnknownLabel,
                    vec![inst.id.clone()],
                    format!("unknown {what} '{label}' on '{}'", inst.id),
                );
                match policy {
                    UnknownLabelPolicy::Error => violations.push(viol),
                    UnknownLabelPolicy::Warn => warnings.push(viol),
                }
                continue;
            };
            let expected = if want_property {
                Group::Property(inst.kind)
            } else {
                Group::Class(inst.kind)
            };
            if group != expected {
                violations.push(Violation::new(
                    ViolationCode::KindMismatch,
                    vec![inst.id.clone()],
                    format!(
                        "'{label}' is not a {} {what} but is listed on {} '{}'",
                        inst.kind, inst.kind, inst.id
                    ),
                ));
            }
        }
    }
    for (label, ancestor) in tax.missing_ancestors(&inst.classes) {
        violations.push(Violation::new(
            ViolationCode::TaxonomyClosure,
            vec![inst.id.clone()],
            format!("'{}' has class '{label}' but not its ancestor '{ancestor}'", inst.id),
        ));
    }
}

// ---------------------------------------------------------------------------
// Hierarchy

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("unknown instance id '{0}'")]
    UnknownId(String),
    #[error("instance '{0}' is not a vessel")]
    NotAVessel(String),
}

/// Instances directly inside `vessel_id`: inside it, and not inside another
/// vessel that is itself inside it.
pub fn direct_content_of(scene: &SceneAnnotation, vessel_id: &str) -> Result<BTreeSet<String>, HierarchyError> {
    let vessel = scene
        .instance(vessel_id)
        .ok_or_else(|| HierarchyError::UnknownId(vessel_id.to_owned()))?;
    if vessel.kind != InstanceKind::Vessel {
        return Err(HierarchyError::NotAVessel(vessel_id.to_owned()));
    }
    let inside = scene.inside_index();
    let is_vessel = |id: &str| scene.instance(id).is_some_and(|i| i.kind == InstanceKind::Vessel);
    let holds = |x: &str, y: &str| inside.get(x).is_some_and(|s| s.contains(y));

    let mut out = BTreeSet::new();
    for (&x, outers) in &inside {
        if x == vessel_id || !outers.contains(vessel_id) {
            continue;
        }
        let nested = outers
            .iter()
            .any(|&w| w != vessel_id && is_vessel(w) && holds(w, vessel_id));
        if !nested {
            out.insert(x.to_owned());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{} semantic violation(s): {}", .0.len(), summarize(.0))]
    Semantic(Vec<Violation>),
}

fn summarize(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

// Field order is alphabetical so serialized keys come out sorted.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocScene {
    image: DocImage,
    instances: Vec<DocInstance>,
    relations: Vec<DocRelation>,
    version: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocImage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    height: u32,
    width: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocInstance {
    classes: Vec<String>,
    #[serde(default)]
    free_standing: bool,
    id: String,
    kind: InstanceKind,
    mask: DocMask,
    properties: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocMask {
    format: String,
    height: u32,
    runs: Vec<u64>,
    width: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocRelation {
    kind: RelationKind,
    object: String,
    subject: String,
}

/// Parses and fully validates a document under the standard taxonomy.
pub fn parse_scene(bytes: &[u8]) -> Result<SceneAnnotation, ParseError> {
    parse_scene_with(bytes, &ValidationOptions::default()).map(|(scene, _)| scene)
}

/// Parses and validates a document; non-fatal findings are returned as
/// warnings alongside the scene.
pub fn parse_scene_with(
    bytes: &[u8],
    opts: &ValidationOptions,
) -> Result<(SceneAnnotation, Vec<Violation>), ParseError> {
    let scene = decode_scene(bytes)?;
    let Validation { violations, warnings } = validate_scene_with(&scene, opts);
    if !violations.is_empty() {
        return Err(ParseError::Semantic(violations));
    }
    Ok((scene, warnings))
}

/// Parses a document without checking scene invariants. Masks still have to
/// be well-formed run lists.
pub fn decode_scene(bytes: &[u8]) -> Result<SceneAnnotation, ParseError> {
    let doc: DocScene = serde_json::from_slice(bytes).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => ParseError::Schema(e.to_string()),
            _ => ParseError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(ParseError::Schema(format!(
            "unsupported version '{}', expected '{FORMAT_VERSION}'",
            doc.version
        )));
    }
    let mut bad_masks = Vec::new();
    let mut instances = Vec::with_capacity(doc.instances.len());
    for inst in doc.instances {
        if inst.mask.format != MASK_FORMAT {
            return Err(ParseError::Schema(format!(
                "instance '{}': unsupported mask format '{}', expected '{MASK_FORMAT}'",
                inst.id, inst.mask.format
            )));
        }
        match BinaryMask::from_runs(inst.mask.width, inst.mask.height, inst.mask.runs) {
            Ok(mask) => instances.push(Instance {
                id: inst.id,
                kind: inst.kind,
                mask,
                classes: inst.classes.iter().map(|s| s.as_str().into()).collect(),
                properties: inst.properties.iter().map(|s| s.as_str().into()).collect(),
                free_standing: inst.free_standing,
            }),
            Err(e) => bad_masks.push(Violation::new(
                ViolationCode::InvalidMask,
                vec![inst.id.clone()],
                format!("mask of '{}': {e}", inst.id),
            )),
        }
    }
    if !bad_masks.is_empty() {
        return Err(ParseError::Semantic(bad_masks));
    }
    let relations = doc
        .relations
        .into_iter()
        .map(|r| Relation::new(r.kind, r.subject, r.object))
        .collect();
    let mut scene = SceneAnnotation {
        width: doc.image.width,
        height: doc.image.height,
        instances,
        relations,
        source: doc.image.file,
    };
    // keep duplicates visible to the validator
    scene.instances.sort_by(|a, b| a.id.cmp(&b.id));
    scene.relations.sort();
    Ok(scene)
}

/// Writes the canonical document: sorted keys, instances sorted by id,
/// relations sorted, compact layout with a trailing newline.
pub fn serialize_scene(scene: &SceneAnnotation) -> Vec<u8> {
    let mut instances: Vec<&Instance> = scene.instances.iter().collect();
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    let mut relations: Vec<&Relation> = scene.relations.iter().collect();
    relations.sort();
    relations.dedup();
    let doc = DocScene {
        image: DocImage {
            file: scene.source.clone(),
            height: scene.height,
            width: scene.width,
        },
        instances: instances
            .into_iter()
            .map(|i| DocInstance {
                classes: i.classes.iter().map(|c| c.as_str().to_owned()).collect(),
                free_standing: i.free_standing,
                id: i.id.clone(),
                kind: i.kind,
                mask: DocMask {
                    format: MASK_FORMAT.to_owned(),
                    height: i.mask.height(),
                    runs: i.mask.runs().to_vec(),
                    width: i.mask.width(),
                },
                properties: i.properties.iter().map(|c| c.as_str().to_owned()).collect(),
            })
            .collect(),
        relations: relations
            .into_iter()
            .map(|r| DocRelation {
                kind: r.kind,
                object: r.object.clone(),
                subject: r.subject.clone(),
            })
            .collect(),
        version: FORMAT_VERSION.to_owned(),
    };
    let mut out = serde_json::to_vec(&doc).expect("scene document serializes");
    out.push(b'\n');
    out
}

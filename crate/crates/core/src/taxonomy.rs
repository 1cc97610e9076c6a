//! Class and property vocabulary for vessels, materials and parts.
//!
//! Class sets are closed upward: an instance labelled `blood` also carries
//! `liquid` and `filled`; a `tube` also carries `vessel`.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(String);

impl ClassLabel {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassLabel {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl Borrow<str> for ClassLabel {
    fn borrow(&self) -> &str {
        &self.0
    }
}

pub type LabelSet = BTreeSet<ClassLabel>;

/// Builds a label set from string names.
pub fn labels<I, S>(names: I) -> LabelSet
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names.into_iter().map(|s| ClassLabel::new(s.as_ref())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Vessel,
    Material,
    Part,
}

impl InstanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Vessel => "vessel",
            InstanceKind::Material => "material",
            InstanceKind::Part => "part",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a taxonomy entry labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    /// A class that instances of this kind may carry.
    Class(InstanceKind),
    /// A property that instances of this kind may carry.
    Property(InstanceKind),
}

impl Group {
    pub fn kind(self) -> InstanceKind {
        match self {
            Group::Class(k) | Group::Property(k) => k,
        }
    }

    pub fn is_property(self) -> bool {
        matches!(self, Group::Property(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonEntry {
    pub group: Group,
    pub parent: Option<ClassLabel>,
}

/// Closed vocabulary with parent edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    entries: BTreeMap<ClassLabel, TaxonEntry>,
    order: Vec<ClassLabel>,
}

const VESSEL_SUBCLASSES: &[&str] = &[
    "tube",
    "iv_bag",
    "iv_bottle",
    "drip_chamber",
    "bottle",
    "syringe",
    "pipette",
    "beaker",
    "bowl",
    "cup",
    "plate",
    "flask",
    "jar",
];

const MATERIAL_CLASSES: &[(&str, &str)] = &[
    ("liquid", "filled"),
    ("suspension", "filled"),
    ("blood", "liquid"),
    ("urine", "liquid"),
    ("solid", "filled"),
    ("powder", "solid"),
    ("granular", "solid"),
    ("foam", "filled"),
    ("gel", "filled"),
];

const PART_CLASSES: &[&str] = &["label", "spike", "cork"];
const VESSEL_PROPERTIES: &[&str] = &["transparent", "semi_transparent", "opaque"];
const MATERIAL_PROPERTIES: &[&str] = &["scattered", "on_surface"];

impl Default for Taxonomy {
    fn default() -> Self {
        Self::standard()
    }
}

impl Taxonomy {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    /// The standard vessel / material / part vocabulary.
    pub fn standard() -> Self {
        let mut t = Self::empty();
        let vessel = InstanceKind::Vessel;
        let material = InstanceKind::Material;
        t.insert("vessel", Group::Class(vessel), None);
        for name in VESSEL_SUBCLASSES {
            t.insert(name, Group::Class(vessel), Some("vessel"));
        }
        t.insert("filled", Group::Class(material), None);
        for (name, parent) in MATERIAL_CLASSES {
            t.insert(name, Group::Class(material), Some(parent));
        }
        for name in PART_CLASSES {
            t.insert(name, Group::Class(InstanceKind::Part), None);
        }
        for name in VESSEL_PROPERTIES {
            t.insert(name, Group::Property(vessel), None);
        }
        for name in MATERIAL_PROPERTIES {
            t.insert(name, Group::Property(material), None);
        }
        t
    }

    fn insert(&mut self, name: &str, group: Group, parent: Option<&str>) {
        let label = ClassLabel::new(name);
        self.order.push(label.clone());
        self.entries.insert(
            label,
            TaxonEntry {
                group,
                parent: parent.map(ClassLabel::new),
            },
        );
    }

    /// Adds a class or property. The parent, if any, must already exist and
    /// belong to the same group.
    pub fn extend(
        &mut self,
        name: &str,
        group: Group,
        parent: Option<&str>,
    ) -> Result<(), String> {
        if self.entries.contains_key(name) {
            return Err(format!("'{name}' is already in the taxonomy"));
        }
        if let Some(p) = parent {
            match self.entries.get(p) {
                Some(e) if e.group == group => {}
                Some(_) => return Err(format!("parent '{p}' belongs to a different group")),
                None => return Err(format!("unknown parent '{p}'")),
            }
        }
        self.insert(name, group, parent);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&TaxonEntry> {
        self.entries.get(label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    pub fn group(&self, label: &str) -> Option<Group> {
        self.entries.get(label).map(|e| e.group)
    }

    /// Position in declaration order, used for table layouts.
    pub fn rank(&self, label: &str) -> usize {
        self.order
            .iter()
            .position(|l| l.as_str() == label)
            .unwrap_or(usize::MAX)
    }

    pub fn labels(&self) -> impl Iterator<Item = &ClassLabel> {
        self.order.iter()
    }

    /// Strict ancestors of `label`, nearest first.
    pub fn ancestors(&self, label: &str) -> Vec<ClassLabel> {
        let mut out = Vec::new();
        let mut current = self.entries.get(label).and_then(|e| e.parent.clone());
        while let Some(p) = current {
            current = self.entries.get(p.as_str()).and_then(|e| e.parent.clone());
            out.push(p);
        }
        out
    }

    /// Adds every ancestor of every member. Unknown labels pass through.
    pub fn close(&self, set: &LabelSet) -> LabelSet {
        let mut out = set.clone();
        for label in set {
            out.extend(self.ancestors(label.as_str()));
        }
        out
    }

    /// `(label, missing ancestor)` pairs that break upward closure.
    pub fn missing_ancestors(&self, set: &LabelSet) -> Vec<(ClassLabel, ClassLabel)> {
        let mut out = Vec::new();
        for label in set {
            for a in self.ancestors(label.as_str()) {
                if !set.contains(&a) {
                    out.push((label.clone(), a));
                }
            }
        }
        out
    }
}

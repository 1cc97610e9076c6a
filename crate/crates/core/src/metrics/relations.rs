use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::{Relation, RelationKind};

use super::{ratio, MetricsError};

/// Evaluated relation classes; `None` holds for a vessel pair with no relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationClass {
    Linked,
    Inside,
    Contain,
    None,
}

impl RelationClass {
    pub const ALL: [RelationClass; 4] = [
        RelationClass::Linked,
        RelationClass::Inside,
        RelationClass::Contain,
        RelationClass::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationClass::Linked => "linked",
            RelationClass::Inside => "inside",
            RelationClass::Contain => "contain",
            RelationClass::None => "none",
        }
    }
}

impl fmt::Display for RelationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl RelationCounts {
    pub fn merge(&mut self, other: &RelationCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn scores(&self) -> RelationScores {
        let (tp, fp, fn_) = (self.tp as f64, self.fp as f64, self.fn_ as f64);
        RelationScores {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            iou: ratio(tp, tp + fp + fn_),
        }
    }

    fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => {}
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub iou: Option<f64>,
}

/// Always holds all four classes.
pub type RelationCounters = BTreeMap<RelationClass, RelationCounts>;

pub fn empty_relation_counters() -> RelationCounters {
    RelationClass::ALL.iter().map(|&c| (c, RelationCounts::default())).collect()
}

/// Compares predicted and ground-truth relations over every ordered pair of
/// distinct vessels in `universe`.
///
/// `inside` and `contain` are counted per ordered pair. `linked` is
/// symmetric and counted once per unordered pair. `none` is counted per
/// ordered pair on which no relation of any kind holds.
pub fn relationship_metrics(
    pred: &[Relation],
    gt: &[Relation],
    universe: &BTreeSet<String>,
) -> Result<RelationCounters, MetricsError> {
    let pred_set = checked_set(pred, universe)?;
    let gt_set = checked_set(gt, universe)?;
    let mut counters = empty_relation_counters();
    let ids: Vec<&str> = universe.iter().map(String::as_str).collect();
    for &a in &ids {
        for &b in &ids {
            if a == b {
                continue;
            }
            let mut any_pred = false;
            let mut any_gt = false;
            for kind in RelationKind::ALL {
                let p = pred_set.contains(&(kind, a, b));
                let g = gt_set.contains(&(kind, a, b));
                any_pred |= p;
                any_gt |= g;
                if kind == RelationKind::Linked && a > b {
                    continue;
                }
                let class = match kind {
                    RelationKind::Linked => RelationClass::Linked,
                    RelationKind::Inside => RelationClass::Inside,
                    RelationKind::Contain => RelationClass::Contain,
                };
                counters.get_mut(&class).unwrap().record(p, g);
            }
            counters
                .get_mut(&RelationClass::None)
                .unwrap()
                .record(!any_pred, !any_gt);
        }
    }
    Ok(counters)
}

fn checked_set<'a>(
    relations: &'a [Relation],
    universe: &BTreeSet<String>,
) -> Result<HashSet<(RelationKind, &'a str, &'a str)>, MetricsError> {
    let set: HashSet<(RelationKind, &str, &str)> = relations
        .iter()
        .map(|r| (r.kind, r.subject.as_str(), r.object.as_str()))
        .collect();
    for r in relations {
        if !universe.contains(&r.subject) || !universe.contains(&r.object) || r.subject == r.object {
            return Err(MetricsError::RelationEndpoint {
                kind: r.kind.to_string(),
                subject: r.subject.clone(),
                object: r.object.clone(),
            });
        }
        let dual = r.kind.reciprocal();
        if !set.contains(&(dual, r.object.as_str(), r.subject.as_str())) {
            return Err(MetricsError::AsymmetricRelation {
                kind: r.kind.to_string(),
                reciprocal: dual.to_string(),
                subject: r.subject.clone(),
                object: r.object.clone(),
            });
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn universe(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    fn linked(a: &str, b: &str) -> [Relation; 2] {
        [
            Relation::new(RelationKind::Linked, a, b),
            Relation::new(RelationKind::Linked, b, a),
        ]
    }

    fn inside(a: &str, b: &str) -> [Relation; 2] {
        [
            Relation::new(RelationKind::Inside, a, b),
            Relation::new(RelationKind::Contain, b, a),
        ]
    }

    #[test]
    fn identity_scores_one() {
        let u = universe(&["1", "2", "3"]);
        let rels: Vec<Relation> = linked("1", "2").into_iter().chain(inside("3", "1")).collect();
        let c = relationship_metrics(&rels, &rels, &u).unwrap();
        for class in RelationClass::ALL {
            let s = c[&class].scores();
            assert_eq!((s.precision, s.recall, s.iou), (Some(1.0), Some(1.0), Some(1.0)), "{class}");
        }
        assert_eq!(c[&RelationClass::Linked].tp, 1);
        assert_eq!(c[&RelationClass::None].tp, 2);
    }

    #[test]
    fn extra_link_example() {
        let u = universe(&["1", "2", "3"]);
        let gt: Vec<Relation> = linked("1", "2").into();
        let pred: Vec<Relation> = linked("1", "2").into_iter().chain(linked("1", "3")).collect();
        let c = relationship_metrics(&pred, &gt, &u).unwrap();
        let l = c[&RelationClass::Linked];
        assert_eq!((l.tp, l.fp, l.fn_), (1, 1, 0));
        let s = l.scores();
        assert_eq!((s.precision, s.recall, s.iou), (Some(0.5), Some(1.0), Some(0.5)));
        // ordered pairs without any relation: gt has 4, pred has 2
        let n = c[&RelationClass::None];
        assert_eq!((n.tp, n.fp, n.fn_), (2, 0, 2));
    }

    #[test]
    fn empty_prediction() {
        let u = universe(&["1", "2"]);
        let gt: Vec<Relation> = inside("1", "2").into();
        let c = relationship_metrics(&[], &gt, &u).unwrap();
        let s = c[&RelationClass::Inside].scores();
        assert_eq!((s.precision, s.recall, s.iou), (None, Some(0.0), Some(0.0)));
    }

    #[test]
    fn endpoint_outside_universe() {
        let u = universe(&["1", "2"]);
        let gt: Vec<Relation> = linked("1", "9").into();
        assert!(matches!(
            relationship_metrics(&[], &gt, &u),
            Err(MetricsError::RelationEndpoint { .. })
        ));
    }

    #[test]
    fn asymmetric_input_rejected() {
        let u = universe(&["1", "2"]);
        let gt = [Relation::new(RelationKind::Inside, "1", "2")];
        assert!(matches!(
            relationship_metrics(&[], &gt, &u),
            Err(MetricsError::AsymmetricRelation { .. })
        ));
    }
}

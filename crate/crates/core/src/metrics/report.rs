use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotation::{direct_content_of, Relation, SceneAnnotation};
use crate::matching::Segment;
use crate::taxonomy::{ClassLabel, InstanceKind, LabelSet};

use super::panoptic::{panoptic_counters, AgnosticCounters, ClassCounts, PanopticCounters, PanopticScores};
use super::relations::{relationship_metrics, RelationClass, RelationCounters, RelationCounts};
use super::semantic::{semantic_maps, semantic_metrics, SemanticCounters};
use super::vessel::{per_vessel_content_eval, PerVesselReport};
use super::MetricsError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub per_vessel: bool,
    pub relations: bool,
}

/// Raw counters for a set of evaluated scenes. Every ratio is derived from
/// these, so reports over disjoint scene sets merge by summation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: ReportConfig,
    pub scenes: u64,
    pub semantic: SemanticCounters,
    pub panoptic_with_class: PanopticCounters,
    pub panoptic_agnostic: AgnosticCounters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<RelationCounters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_vessel: Option<PerVesselReport>,
}

impl MetricReport {
    /// Identity element of [`MetricReport::merge`].
    pub fn empty(config: ReportConfig) -> Self {
        Self {
            config,
            scenes: 0,
            semantic: SemanticCounters::new(),
            panoptic_with_class: PanopticCounters::new(),
            panoptic_agnostic: AgnosticCounters::default(),
            relations: config.relations.then(super::relations::empty_relation_counters),
            per_vessel: config.per_vessel.then(PerVesselReport::default),
        }
    }

    pub fn merge(&mut self, other: &MetricReport) -> Result<(), MetricsError> {
        if self.config != other.config {
            return Err(MetricsError::ConfigMismatch);
        }
        self.scenes += other.scenes;
        for (l, c) in &other.semantic {
            self.semantic.entry(l.clone()).or_default().merge(c);
        }
        for (l, c) in &other.panoptic_with_class {
            self.panoptic_with_class.entry(l.clone()).or_default().merge(c);
        }
        self.panoptic_agnostic.merge(&other.panoptic_agnostic);
        if let (Some(mine), Some(theirs)) = (self.relations.as_mut(), other.relations.as_ref()) {
            for (class, c) in theirs {
                mine.entry(*class).or_default().merge(c);
            }
        }
        if let (Some(mine), Some(theirs)) = (self.per_vessel.as_mut(), other.per_vessel.as_ref()) {
            mine.merge(theirs);
        }
        Ok(())
    }

    /// Class-agnostic counters with false positives split across labels.
    pub fn agnostic_counters(&self) -> (PanopticCounters, u64) {
        self.panoptic_agnostic.to_panoptic()
    }

    pub fn summary(&self) -> ReportSummary {
        let semantic = self
            .semantic
            .iter()
            .map(|(label, c)| {
                let s = c.scores();
                SemanticRow {
                    label: label.clone(),
                    iou: s.iou,
                    precision: s.precision,
                    recall: s.recall,
                    gt_px: c.gt,
                    pred_px: c.pred,
                }
            })
            .collect();

        let (agnostic, unattributed_fp) = self.agnostic_counters();
        let labels: LabelSet = self
            .panoptic_with_class
            .keys()
            .chain(agnostic.keys())
            .cloned()
            .collect();
        let panoptic = labels
            .into_iter()
            .map(|label| {
                let wc = self.panoptic_with_class.get(&label).copied().unwrap_or_default();
                let ag = agnostic.get(&label).copied().unwrap_or_default();
                PanopticRow {
                    support: self
                        .panoptic_agnostic
                        .classes
                        .get(&label)
                        .map_or(0, |c| c.gt_segments()),
                    with_class: wc.scores(),
                    agnostic: ag.scores(),
                    with_class_counts: wc,
                    agnostic_counts: ag,
                    label,
                }
            })
            .collect();

        let relations = self.relations.as_ref().map(|rc| {
            RelationClass::ALL
                .iter()
                .map(|class| {
                    let c = rc.get(class).copied().unwrap_or_default();
                    let s = c.scores();
                    RelationRow {
                        class: *class,
                        precision: s.precision,
                        recall: s.recall,
                        iou: s.iou,
                        counts: c,
                    }
                })
                .collect()
        });

        let per_vessel = self.per_vessel.as_ref().map(|pv| {
            let semantic = pv
                .semantic
                .iter()
                .map(|(label, m)| VesselSemanticRow {
                    label: label.clone(),
                    macro_avg: m.means(),
                    support: m.iou.support,
                    micro: pv.micro_semantic.get(label).copied().unwrap_or_default().scores(),
                })
                .collect();
            let labels: LabelSet = pv.with_class.keys().chain(pv.agnostic.keys()).cloned().collect();
            let panoptic = labels
                .into_iter()
                .map(|label| {
                    let wc = pv.with_class.get(&label).copied().unwrap_or_default();
                    let ag = pv.agnostic.get(&label).copied().unwrap_or_default();
                    VesselPanopticRow {
                        support: wc.rq.support.max(ag.rq.support),
                        with_class: wc.means(),
                        agnostic: ag.means(),
                        label,
                    }
                })
                .collect();
            VesselSummary {
                vessels: pv.vessels,
                semantic,
                panoptic,
            }
        });

        ReportSummary {
            scenes: self.scenes,
            semantic,
            panoptic,
            unattributed_fp,
            relations,
            per_vessel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticRow {
    pub label: ClassLabel,
    pub iou: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub gt_px: u64,
    pub pred_px: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanopticRow {
    pub label: ClassLabel,
    pub with_class: PanopticScores,
    pub agnostic: PanopticScores,
    pub with_class_counts: ClassCounts,
    pub agnostic_counts: ClassCounts,
    /// Ground-truth segments carrying the label.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub class: RelationClass,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub iou: Option<f64>,
    pub counts: RelationCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselSemanticRow {
    pub label: ClassLabel,
    #[serde(rename = "macro")]
    pub macro_avg: super::SemanticScores,
    pub micro: super::SemanticScores,
    /// Vessels in which the label was present.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselPanopticRow {
    pub label: ClassLabel,
    pub with_class: PanopticScores,
    pub agnostic: PanopticScores,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselSummary {
    pub vessels: u64,
    pub semantic: Vec<VesselSemanticRow>,
    pub panoptic: Vec<VesselPanopticRow>,
}

/// Derived per-label scores, sorted by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub scenes: u64,
    pub semantic: Vec<SemanticRow>,
    pub panoptic: Vec<PanopticRow>,
    /// Class-agnostic false positives that could not be split because the
    /// ground truth has no segments at all.
    pub unattributed_fp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<RelationRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_vessel: Option<VesselSummary>,
}

/// Evaluates one scene. A missing prediction counts as an empty one.
pub fn evaluate_scene(
    gt: &SceneAnnotation,
    pred: Option<&SceneAnnotation>,
    config: ReportConfig,
) -> Result<MetricReport, MetricsError> {
    let empty_pred;
    let pred = match pred {
        Some(p) => p,
        None => {
            empty_pred = SceneAnnotation::new(gt.width, gt.height);
            &empty_pred
        }
    };
    if (pred.width, pred.height) != (gt.width, gt.height) {
        return Err(MetricsError::ImageSize {
            gt_width: gt.width,
            gt_height: gt.height,
            pred_width: pred.width,
            pred_height: pred.height,
        });
    }

    let gt_labels: Vec<LabelSet> = gt.instances.iter().map(|i| i.eval_labels()).collect();
    let pred_labels: Vec<LabelSet> = pred.instances.iter().map(|i| i.eval_labels()).collect();

    let gt_maps = semantic_maps(gt.width, gt.height, gt.instances.iter().map(|i| &i.mask).zip(&gt_labels))?;
    let pred_maps = semantic_maps(gt.width, gt.height, pred.instances.iter().map(|i| &i.mask).zip(&pred_labels))?;
    let semantic = semantic_metrics(&pred_maps, &gt_maps)?;

    let gt_segments: Vec<Segment> = gt
        .instances
        .iter()
        .zip(&gt_labels)
        .map(|(i, l)| Segment::new(&i.mask, l.clone()))
        .collect();
    let pred_segments: Vec<Segment> = pred
        .instances
        .iter()
        .zip(&pred_labels)
        .map(|(i, l)| Segment::new(&i.mask, l.clone()))
        .collect();
    let (with_class, agnostic) = panoptic_counters(&pred_segments, &gt_segments)?;

    let relations = if config.relations {
        let universe: BTreeSet<String> = gt.vessels().map(|v| v.id.clone()).collect();
        let gt_rel = vessel_relations(gt);
        let pred_rel = vessel_relations(pred);
        Some(relationship_metrics(&pred_rel, &gt_rel, &universe)?)
    } else {
        None
    };

    let per_vessel = if config.per_vessel {
        let mut content: BTreeMap<String, Vec<Segment>> = BTreeMap::new();
        for v in gt.vessels() {
            let Some(pv) = pred.instance(&v.id).filter(|i| i.kind == InstanceKind::Vessel) else {
                continue;
            };
            let ids = direct_content_of(pred, &pv.id)?;
            let segs = ids
                .iter()
                .filter_map(|id| pred.instance(id))
                .map(|i| Segment::new(&i.mask, i.eval_labels()))
                .collect();
            content.insert(v.id.clone(), segs);
        }
        Some(per_vessel_content_eval(gt, &content)?)
    } else {
        None
    };

    Ok(MetricReport {
        config,
        scenes: 1,
        semantic,
        panoptic_with_class: with_class,
        panoptic_agnostic: agnostic,
        relations,
        per_vessel,
    })
}

/// Relations whose endpoints are both vessels of the same scene.
fn vessel_relations(scene: &SceneAnnotation) -> Vec<Relation> {
    let is_vessel = |id: &str| scene.instance(id).is_some_and(|i| i.kind == InstanceKind::Vessel);
    scene
        .relations
        .iter()
        .filter(|r| is_vessel(&r.subject) && is_vessel(&r.object))
        .cloned()
        .collect()
}

/// Folds reports in the given order.
pub fn aggregate_reports(config: ReportConfig, reports: &[MetricReport]) -> Result<MetricReport, MetricsError> {
    let mut acc = MetricReport::empty(config);
    for r in reports {
        acc.merge(r)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Instance;
    use crate::mask::BinaryMask;
    use crate::taxonomy::labels;

    fn rect(x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
        BinaryMask::rect(20, 20, x0, y0, x1, y1).unwrap()
    }

    fn scene() -> SceneAnnotation {
        let mut s = SceneAnnotation::new(20, 20);
        s.push(
            Instance::new("v1", InstanceKind::Vessel, rect(0, 0, 10, 20), labels(["vessel", "tube"]))
                .with_properties(labels(["transparent"])),
        )
        .push(Instance::new("v2", InstanceKind::Vessel, rect(10, 0, 20, 20), labels(["vessel", "jar"])))
        .push(Instance::new("m1", InstanceKind::Material, rect(0, 14, 10, 20), labels(["liquid", "filled"])))
        .push(Instance::new("m2", InstanceKind::Material, rect(10, 15, 20, 20), labels(["solid", "filled"])))
        .place_inside("m1", "v1")
        .place_inside("m2", "v2")
        .link("v1", "v2");
        s
    }

    const FULL: ReportConfig = ReportConfig {
        per_vessel: true,
        relations: true,
    };

    #[test]
    fn identity_scores_one() {
        let s = scene();
        let r = evaluate_scene(&s, Some(&s), FULL).unwrap();
        let sum = r.summary();
        for row in &sum.semantic {
            assert_eq!((row.iou, row.precision, row.recall), (Some(1.0), Some(1.0), Some(1.0)));
        }
        for row in &sum.panoptic {
            for sc in [row.with_class, row.agnostic] {
                assert_eq!((sc.pq, sc.sq, sc.rq), (Some(1.0), Some(1.0), Some(1.0)), "{}", row.label);
            }
        }
        for row in sum.relations.as_ref().unwrap() {
            // only the link has support; the other classes stay undefined
            let want = if row.class == RelationClass::Linked { Some(1.0) } else { None };
            assert_eq!((row.precision, row.recall, row.iou), (want, want, want), "{}", row.class);
        }
        let pv = sum.per_vessel.unwrap();
        assert_eq!(pv.vessels, 2);
        assert!(pv.panoptic.iter().all(|r| r.with_class.pq == Some(1.0)));
    }

    #[test]
    fn missing_prediction_is_all_false_negative() {
        let s = scene();
        let r = evaluate_scene(&s, None, FULL).unwrap();
        for row in r.summary().panoptic {
            assert_eq!(row.with_class_counts.tp, 0);
            assert_eq!(row.with_class_counts.fn_, row.support);
            assert_eq!(row.agnostic.rq, Some(0.0));
        }
        for row in r.summary().semantic {
            assert_eq!(row.recall, Some(0.0));
        }
        let rel = r.summary().relations.unwrap();
        assert_eq!(rel[0].class, RelationClass::Linked);
        assert_eq!((rel[0].precision, rel[0].recall), (None, Some(0.0)));
    }

    #[test]
    fn merge_identity_and_commutativity() {
        let s = scene();
        let a = evaluate_scene(&s, Some(&s), FULL).unwrap();
        let b = evaluate_scene(&s, None, FULL).unwrap();
        let mut with_empty = a.clone();
        with_empty.merge(&MetricReport::empty(FULL)).unwrap();
        assert_eq!(with_empty, a);
        let ab = aggregate_reports(FULL, &[a.clone(), b.clone()]).unwrap();
        let ba = aggregate_reports(FULL, &[b, a.clone()]).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(ab.scenes, 2);
        let other = MetricReport::empty(ReportConfig::default());
        assert_eq!(a.clone().merge(&other), Err(MetricsError::ConfigMismatch));
    }

    #[test]
    fn serde_round_trip() {
        let s = scene();
        let r = evaluate_scene(&s, Some(&s), FULL).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: MetricReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn image_size_mismatch() {
        let s = scene();
        let other = SceneAnnotation::new(5, 5);
        assert!(matches!(
            evaluate_scene(&s, Some(&other), FULL),
            Err(MetricsError::ImageSize { .. })
        ));
    }
}

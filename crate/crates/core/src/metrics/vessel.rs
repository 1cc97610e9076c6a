//! Content evaluation restricted to one vessel at a time.
//!
//! Each ground-truth vessel's direct content is compared with the content
//! predicted for that vessel; per-vessel scores are macro-averaged over
//! vessels, and the underlying counters are also summed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::{direct_content_of, SceneAnnotation};
use crate::matching::Segment;
use crate::taxonomy::{ClassLabel, InstanceKind};

use super::panoptic::{panoptic_counters, AgnosticCounters, PanopticCounters, PanopticScores};
use super::semantic::{semantic_maps, semantic_metrics, SemanticCounters, SemanticScores};
use super::MetricsError;

/// Running mean over defined values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MacroMean {
    pub sum: f64,
    pub support: u64,
}

impl MacroMean {
    pub fn add(&mut self, value: Option<f64>) {
        if let Some(v) = value {
            self.sum += v;
            self.support += 1;
        }
    }

    pub fn merge(&mut self, other: &MacroMean) {
        self.sum += other.sum;
        self.support += other.support;
    }

    pub fn mean(&self) -> Option<f64> {
        if self.support == 0 {
            None
        } else {
            Some(self.sum / self.support as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MacroSemantic {
    pub iou: MacroMean,
    pub precision: MacroMean,
    pub recall: MacroMean,
}

impl MacroSemantic {
    fn add(&mut self, s: &SemanticScores) {
        self.iou.add(s.iou);
        self.precision.add(s.precision);
        self.recall.add(s.recall);
    }

    fn merge(&mut self, o: &MacroSemantic) {
        self.iou.merge(&o.iou);
        self.precision.merge(&o.precision);
        self.recall.merge(&o.recall);
    }

    pub fn means(&self) -> SemanticScores {
        SemanticScores {
            iou: self.iou.mean(),
            precision: self.precision.mean(),
            recall: self.recall.mean(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MacroPanoptic {
    pub pq: MacroMean,
    pub sq: MacroMean,
    pub rq: MacroMean,
}

impl MacroPanoptic {
    fn add(&mut self, s: &PanopticScores) {
        self.pq.add(s.pq);
        self.sq.add(s.sq);
        self.rq.add(s.rq);
    }

    fn merge(&mut self, o: &MacroPanoptic) {
        self.pq.merge(&o.pq);
        self.sq.merge(&o.sq);
        self.rq.merge(&o.rq);
    }

    pub fn means(&self) -> PanopticScores {
        PanopticScores {
            pq: self.pq.mean(),
            sq: self.sq.mean(),
            rq: self.rq.mean(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerVesselReport {
    pub vessels: u64,
    pub semantic: BTreeMap<ClassLabel, MacroSemantic>,
    pub with_class: BTreeMap<ClassLabel, MacroPanoptic>,
    pub agnostic: BTreeMap<ClassLabel, MacroPanoptic>,
    pub micro_semantic: SemanticCounters,
    pub micro_with_class: PanopticCounters,
    pub micro_agnostic: AgnosticCounters,
}

impl PerVesselReport {
    pub fn merge(&mut self, other: &PerVesselReport) {
        self.vessels += other.vessels;
        for (l, m) in &other.semantic {
            self.semantic.entry(l.clone()).or_default().merge(m);
        }
        for (l, m) in &other.with_class {
            self.with_class.entry(l.clone()).or_default().merge(m);
        }
        for (l, m) in &other.agnostic {
            self.agnostic.entry(l.clone()).or_default().merge(m);
        }
        for (l, c) in &other.micro_semantic {
            self.micro_semantic.entry(l.clone()).or_default().merge(c);
        }
        for (l, c) in &other.micro_with_class {
            self.micro_with_class.entry(l.clone()).or_default().merge(c);
        }
        self.micro_agnostic.merge(&other.micro_agnostic);
    }
}

/// Evaluates predicted content per ground-truth vessel. `pred_content` is
/// keyed by ground-truth vessel id; vessels without an entry are treated as
/// having no predicted content.
pub fn per_vessel_content_eval(
    gt: &SceneAnnotation,
    pred_content: &BTreeMap<String, Vec<Segment<'_>>>,
) -> Result<PerVesselReport, MetricsError> {
    for key in pred_content.keys() {
        if !gt
            .instance(key)
            .is_some_and(|i| i.kind == InstanceKind::Vessel)
        {
            return Err(MetricsError::UnknownVessel(key.clone()));
        }
    }
    let mut vessel_ids: Vec<&str> = gt.vessels().map(|v| v.id.as_str()).collect();
    vessel_ids.sort_unstable();

    let mut report = PerVesselReport::default();
    let no_content = Vec::new();
    for vessel in vessel_ids {
        let content = direct_content_of(gt, vessel)?;
        let gt_segments: Vec<Segment> = content
            .iter()
            .filter_map(|id| gt.instance(id))
            .map(|i| Segment::new(&i.mask, i.eval_labels()))
            .collect();
        let pred_segments = pred_content.get(vessel).unwrap_or(&no_content);
        let one = evaluate_vessel(gt.width, gt.height, pred_segments, &gt_segments)?;
        report.merge(&one);
    }
    Ok(report)
}

fn evaluate_vessel(
    width: u32,
    height: u32,
    preds: &[Segment<'_>],
    gts: &[Segment<'_>],
) -> Result<PerVesselReport, MetricsError> {
    let pred_maps = semantic_maps(width, height, preds.iter().map(|s| (s.mask, &s.labels)))?;
    let gt_maps = semantic_maps(width, height, gts.iter().map(|s| (s.mask, &s.labels)))?;
    let semantic = semantic_metrics(&pred_maps, &gt_maps)?;
    let (with_class, agnostic) = panoptic_counters(preds, gts)?;

    let mut out = PerVesselReport {
        vessels: 1,
        ..Default::default()
    };
    for (label, counts) in &semantic {
        out.semantic.entry(label.clone()).or_default().add(&counts.scores());
    }
    for (label, counts) in &with_class {
        out.with_class.entry(label.clone()).or_default().add(&counts.scores());
    }
    // false positives split by this vessel's own label shares
    let (split, _) = agnostic.to_panoptic();
    for (label, counts) in &split {
        out.agnostic.entry(label.clone()).or_default().add(&counts.scores());
    }
    out.micro_semantic = semantic;
    out.micro_with_class = with_class;
    out.micro_agnostic = agnostic;
    Ok(out)
}

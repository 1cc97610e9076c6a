//! Panoptic quality, with-class and class-agnostic.
//!
//! RQ = TP / (TP + (FP + FN) / 2), SQ = mean IOU of matched pairs,
//! PQ = RQ * SQ. In class-agnostic mode matching ignores labels; each matched
//! or missed ground-truth segment counts once for every label it carries, and
//! the unmatched predictions are shared out across labels in proportion to
//! how often each label occurs among ground-truth segments.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::mask::MaskError;
use crate::matching::{iou_matrix, match_subset, IouMatrix, MatchMode, Segment};
use crate::taxonomy::{ClassLabel, LabelSet};

use super::{ratio, MetricsError};

const IOU_UNIT: f64 = (1u64 << 53) as f64;

/// Exact running sum of matched IOU values.
///
/// Matched IOUs lie in (0.5, 1], where every `f64` is an integer multiple of
/// 2^-53, so the sum is kept as an integer count of those units. Merging is
/// then exact and independent of order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IouSum(u128);

impl IouSum {
    pub fn add(&mut self, iou: f64) {
        let scaled = iou * IOU_UNIT;
        debug_assert!((0.0..=IOU_UNIT).contains(&scaled) && scaled.fract() == 0.0, "iou {iou} not on the 2^-53 grid");
        self.0 += scaled.round() as u128;
    }

    pub fn merge(&mut self, other: IouSum) {
        self.0 += other.0;
    }

    pub fn units(&self) -> u128 {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / IOU_UNIT
    }
}

#[derive(Serialize, Deserialize)]
struct IouSumRepr {
    units: u128,
    #[serde(default, skip_deserializing)]
    value: f64,
}

impl Serialize for IouSum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IouSumRepr {
            units: self.0,
            value: self.value(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IouSum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        IouSumRepr::deserialize(d).map(|r| IouSum(r.units))
    }
}

/// Panoptic counters for one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    /// Real-valued in class-agnostic mode.
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub iou_sum: IouSum,
}

impl ClassCounts {
    pub fn merge(&mut self, other: &ClassCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.iou_sum.merge(other.iou_sum);
    }

    pub fn scores(&self) -> PanopticScores {
        if self.tp == 0 && self.fp == 0.0 && self.fn_ == 0 {
            return PanopticScores::default();
        }
        let tp = self.tp as f64;
        let rq = ratio(tp, tp + 0.5 * (self.fp + self.fn_ as f64));
        if self.tp == 0 {
            return PanopticScores {
                pq: Some(0.0),
                sq: None,
                rq,
            };
        }
        let sq = ratio(self.iou_sum.value(), tp);
        PanopticScores {
            pq: rq.zip(sq).map(|(r, s)| r * s),
            sq,
            rq,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PanopticScores {
    pub pq: Option<f64>,
    pub sq: Option<f64>,
    pub rq: Option<f64>,
}

pub type PanopticCounters = BTreeMap<ClassLabel, ClassCounts>;

pub fn panoptic_metrics(counters: &PanopticCounters) -> BTreeMap<ClassLabel, PanopticScores> {
    counters
        .iter()
        .filter(|(_, c)| c.tp > 0 || c.fp > 0.0 || c.fn_ > 0)
        .map(|(l, c)| (l.clone(), c.scores()))
        .collect()
}

/// Ground-truth side counters of class-agnostic matching for one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgnosticCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub iou_sum: IouSum,
}

impl AgnosticCounts {
    /// Ground-truth segments carrying the label.
    pub fn gt_segments(&self) -> u64 {
        self.tp + self.fn_
    }
}

/// Raw class-agnostic counters. False positives are kept as one total and
/// only split across labels by [`AgnosticCounters::to_panoptic`], so the
/// split always uses the label shares of the whole evaluated set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgnosticCounters {
    pub classes: BTreeMap<ClassLabel, AgnosticCounts>,
    pub unmatched_pred: u64,
}

impl AgnosticCounters {
    pub fn merge(&mut self, other: &AgnosticCounters) {
        for (label, c) in &other.classes {
            let e = self.classes.entry(label.clone()).or_default();
            e.tp += c.tp;
            e.fn_ += c.fn_;
            e.iou_sum.merge(c.iou_sum);
        }
        self.unmatched_pred += other.unmatched_pred;
    }

    /// Ground-truth share of each label, multi-label segments counted once
    /// per label. `None` when there are no ground-truth segments.
    pub fn class_fractions(&self) -> Option<BTreeMap<ClassLabel, f64>> {
        let total: u64 = self.classes.values().map(AgnosticCounts::gt_segments).sum();
        if total == 0 {
            return None;
        }
        Some(
            self.classes
                .iter()
                .map(|(l, c)| (l.clone(), c.gt_segments() as f64 / total as f64))
                .collect(),
        )
    }

    /// Per-label counters with the false positives split by label share.
    /// Without any ground-truth segment the false positives cannot be
    /// attributed and are returned as the second element instead.
    pub fn to_panoptic(&self) -> (PanopticCounters, u64) {
        let Some(fractions) = self.class_fractions() else {
            return (PanopticCounters::new(), self.unmatched_pred);
        };
        let fp = split_false_positives(self.unmatched_pred as f64, &fractions)
            .expect("label shares are normalized by construction");
        let counters = self
            .classes
            .iter()
            .map(|(l, c)| {
                (
                    l.clone(),
                    ClassCounts {
                        tp: c.tp,
                        fp: fp[l],
                        fn_: c.fn_,
                        iou_sum: c.iou_sum,
                    },
                )
            })
            .collect();
        (counters, 0)
    }
}

const FRACTION_TOLERANCE: f64 = 1e-9;

/// Apportions a false-positive total across labels: `total * fraction`.
pub fn split_false_positives(
    total: f64,
    fractions: &BTreeMap<ClassLabel, f64>,
) -> Result<BTreeMap<ClassLabel, f64>, MetricsError> {
    for (label, &f) in fractions {
        if !f.is_finite() || f < 0.0 {
            return Err(MetricsError::InvalidFraction {
                label: label.to_string(),
                value: f,
            });
        }
    }
    let sum: f64 = fractions.values().sum();
    if (sum - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(MetricsError::FractionsNotNormalized { sum });
    }
    Ok(fractions.iter().map(|(l, &f)| (l.clone(), total * f)).collect())
}

/// With-class and class-agnostic counters from one shared IOU matrix.
pub fn panoptic_counters(
    preds: &[Segment<'_>],
    gts: &[Segment<'_>],
) -> Result<(PanopticCounters, AgnosticCounters), MaskError> {
    let matrix = matrix_of(preds, gts)?;
    Ok((with_class_from(&matrix, preds, gts), agnostic_from(&matrix, preds, gts)))
}

/// Standard per-label panoptic counting: for each label, predictions and
/// ground truth carrying it are matched among themselves.
pub fn with_class_panoptic(preds: &[Segment<'_>], gts: &[Segment<'_>]) -> Result<PanopticCounters, MaskError> {
    let matrix = matrix_of(preds, gts)?;
    Ok(with_class_from(&matrix, preds, gts))
}

/// Class-agnostic matching, counted per ground-truth label.
pub fn class_agnostic_panoptic(preds: &[Segment<'_>], gts: &[Segment<'_>]) -> Result<AgnosticCounters, MaskError> {
    let matrix = matrix_of(preds, gts)?;
    Ok(agnostic_from(&matrix, preds, gts))
}

fn matrix_of(preds: &[Segment<'_>], gts: &[Segment<'_>]) -> Result<IouMatrix, MaskError> {
    let p: Vec<_> = preds.iter().map(|s| s.mask).collect();
    let g: Vec<_> = gts.iter().map(|s| s.mask).collect();
    iou_matrix(&p, &g)
}

fn with_class_from(matrix: &IouMatrix, preds: &[Segment<'_>], gts: &[Segment<'_>]) -> PanopticCounters {
    let all: LabelSet = preds
        .iter()
        .chain(gts)
        .flat_map(|s| s.labels.iter().cloned())
        .collect();
    let mut out = PanopticCounters::new();
    for label in all {
        let p: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].labels.contains(&label)).collect();
        let g: Vec<usize> = (0..gts.len()).filter(|&i| gts[i].labels.contains(&label)).collect();
        let result = match_subset(matrix, &p, &g, MatchMode::WithClass, |_, _| true);
        let mut counts = ClassCounts {
            tp: result.matches.len() as u64,
            fp: result.fp_pred.len() as f64,
            fn_: result.fn_gt.len() as u64,
            iou_sum: IouSum::default(),
        };
        for m in &result.matches {
            counts.iou_sum.add(m.iou);
        }
        out.insert(label, counts);
    }
    out
}

fn agnostic_from(matrix: &IouMatrix, preds: &[Segment<'_>], gts: &[Segment<'_>]) -> AgnosticCounters {
    let p: Vec<usize> = (0..preds.len()).collect();
    let g: Vec<usize> = (0..gts.len()).collect();
    let result = match_subset(matrix, &p, &g, MatchMode::ClassAgnostic, |_, _| true);
    let mut out = AgnosticCounters {
        classes: BTreeMap::new(),
        unmatched_pred: result.fp_pred.len() as u64,
    };
    for m in &result.matches {
        for label in &gts[m.gt].labels {
            let e = out.classes.entry(label.clone()).or_default();
            e.tp += 1;
            e.iou_sum.add(m.iou);
        }
    }
    for &g in &result.fn_gt {
        for label in &gts[g].labels {
            out.classes.entry(label.clone()).or_default().fn_ += 1;
        }
    }
    out
}

//! Segment correspondence: IOU matrices, thresholded panoptic matching,
//! Hungarian assignment for the instance loss, slot padding, and class
//! assignment by semantic overlap.

mod hungarian;

use std::borrow::Borrow;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{BinaryMask, MaskError, OverlapCounts};
use crate::taxonomy::{ClassLabel, LabelSet};

pub use hungarian::{hungarian_assign, hungarian_assign_tiebreak, Assignment, CostMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("cost matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("cost entry ({row}, {col}) is negative or not finite")]
    InvalidCost { row: usize, col: usize },
    #[error("malformed cost matrix: {0}")]
    Shape(String),
    #[error("{count} masks do not fit in {slots} slots")]
    Capacity { count: usize, slots: usize },
}

/// Pairwise overlap of predicted (rows) against ground-truth (cols) masks.
#[derive(Debug, Clone, PartialEq)]
pub struct IouMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<OverlapCounts>,
}

impl IouMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn counts(&self, pred: usize, gt: usize) -> OverlapCounts {
        self.counts[pred * self.cols + gt]
    }

    /// IOU of the pair, with the both-empty case mapped to 0.
    pub fn get(&self, pred: usize, gt: usize) -> f64 {
        self.counts(pred, gt).iou().unwrap_or(0.0)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

pub fn iou_matrix<P, G>(preds: &[P], gts: &[G]) -> Result<IouMatrix, MaskError>
where
    P: Borrow<BinaryMask>,
    G: Borrow<BinaryMask>,
{
    let mut counts = Vec::with_capacity(preds.len() * gts.len());
    for p in preds {
        for g in gts {
            counts.push(p.borrow().overlap_counts(g.borrow())?);
        }
    }
    Ok(IouMatrix {
        rows: preds.len(),
        cols: gts.len(),
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Matched segments must share at least one label.
    WithClass,
    /// Labels are ignored when matching.
    ClassAgnostic,
}

/// A mask with the label set it is evaluated under.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<'a> {
    pub mask: &'a BinaryMask,
    pub labels: LabelSet,
}

impl<'a> Segment<'a> {
    pub fn new(mask: &'a BinaryMask, labels: LabelSet) -> Self {
        Self { mask, labels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Sorted by ground-truth index.
    pub matches: Vec<Match>,
    pub fn_gt: Vec<usize>,
    pub fp_pred: Vec<usize>,
    pub mode: MatchMode,
}

/// Greedy one-to-one matching of predictions to ground truth at IOU > 0.5.
pub fn pq_match(preds: &[Segment<'_>], gts: &[Segment<'_>], mode: MatchMode) -> Result<MatchResult, MaskError> {
    let pred_masks: Vec<&BinaryMask> = preds.iter().map(|s| s.mask).collect();
    let gt_masks: Vec<&BinaryMask> = gts.iter().map(|s| s.mask).collect();
    let matrix = iou_matrix(&pred_masks, &gt_masks)?;
    let pred_idx: Vec<usize> = (0..preds.len()).collect();
    let gt_idx: Vec<usize> = (0..gts.len()).collect();
    Ok(match_subset(&matrix, &pred_idx, &gt_idx, mode, |p, g| {
        !preds[p].labels.is_disjoint(&gts[g].labels)
    }))
}

/// Greedy matching restricted to the given prediction and ground-truth
/// indices of a precomputed matrix. `compatible` is consulted only in
/// [`MatchMode::WithClass`]. Indices in the result refer to the matrix.
pub fn match_subset<F>(
    matrix: &IouMatrix,
    preds: &[usize],
    gts: &[usize],
    mode: MatchMode,
    compatible: F,
) -> MatchResult
where
    F: Fn(usize, usize) -> bool,
{
    let mut candidates = Vec::new();
    for &p in preds {
        for &g in gts {
            let c = matrix.counts(p, g);
            if c.iou_above_half() && (mode == MatchMode::ClassAgnostic || compatible(p, g)) {
                candidates.push((c, g, p));
            }
        }
    }
    candidates.sort_by(|a, b| cmp_iou_desc(&a.0, &b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut pred_used = vec![false; matrix.rows];
    let mut gt_used = vec![false; matrix.cols];
    let mut matches = Vec::new();
    for (c, g, p) in candidates {
        if pred_used[p] || gt_used[g] {
            continue;
        }
        pred_used[p] = true;
        gt_used[g] = true;
        matches.push(Match {
            pred: p,
            gt: g,
            iou: c.iou().unwrap_or(0.0),
        });
    }
    matches.sort_by_key(|m| m.gt);
    MatchResult {
        matches,
        fn_gt: gts.iter().copied().filter(|&g| !gt_used[g]).collect(),
        fp_pred: preds.iter().copied().filter(|&p| !pred_used[p]).collect(),
        mode,
    }
}

/// Exact comparison of two IOU fractions, larger first.
fn cmp_iou_desc(a: &OverlapCounts, b: &OverlapCounts) -> Ordering {
    let lhs = a.intersection as u128 * b.union as u128;
    let rhs = b.intersection as u128 * a.union as u128;
    rhs.cmp(&lhs)
}

/// Appends empty masks until there are exactly `slots` masks.
pub fn pad_instances<M: Borrow<BinaryMask>>(
    gt_masks: &[M],
    slots: usize,
    width: u32,
    height: u32,
) -> Result<Vec<BinaryMask>, MatchingError> {
    if gt_masks.len() > slots {
        return Err(MatchingError::Capacity {
            count: gt_masks.len(),
            slots,
        });
    }
    let empty = BinaryMask::empty(width, height)?;
    let mut out = Vec::with_capacity(slots);
    for m in gt_masks {
        empty.check_same_dims(m.borrow())?;
        out.push(m.borrow().clone());
    }
    out.resize(slots, empty);
    Ok(out)
}

/// Fraction of an instance that must be covered by a semantic map, as
/// `numerator / denominator`; the comparison is strict.
pub const CLASS_OVERLAP_THRESHOLD: (u64, u64) = (33, 100);

/// Labels each instance with every class whose semantic map covers more than
/// 33% of the instance's area.
pub fn assign_classes_to_instances<M: Borrow<BinaryMask>>(
    instance_masks: &[M],
    semantic_maps: &[(ClassLabel, BinaryMask)],
) -> Result<Vec<LabelSet>, MaskError> {
    let (num, den) = CLASS_OVERLAP_THRESHOLD;
    instance_masks
        .iter()
        .map(|inst| {
            let inst = inst.borrow();
            let area = inst.area();
            if area == 0 {
                return Err(MaskError::EmptyInner);
            }
            let mut set = LabelSet::new();
            for (label, map) in semantic_maps {
                let covered = inst.intersection_area(map)?;
                if covered as u128 * den as u128 > num as u128 * area as u128 {
                    set.insert(label.clone());
                }
            }
            Ok(set)
        })
        .collect()
}

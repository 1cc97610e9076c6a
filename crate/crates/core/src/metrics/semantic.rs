use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::mask::{BinaryMask, MaskError};
use crate::taxonomy::{ClassLabel, LabelSet};

use super::ratio;

/// Pixel counters for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelCounts {
    pub intersection: u64,
    pub union: u64,
    pub gt: u64,
    pub pred: u64,
}

impl PixelCounts {
    pub fn merge(&mut self, other: &PixelCounts) {
        self.intersection += other.intersection;
        self.union += other.union;
        self.gt += other.gt;
        self.pred += other.pred;
    }

    /// Neither ground truth nor prediction has any pixel of the class.
    pub fn is_absent(&self) -> bool {
        self.gt == 0 && self.pred == 0
    }

    pub fn scores(&self) -> SemanticScores {
        if self.is_absent() {
            return SemanticScores::default();
        }
        let i = self.intersection as f64;
        SemanticScores {
            iou: ratio(i, self.union as f64),
            // predicting nothing for a present class scores 0 precision
            precision: if self.pred == 0 { Some(0.0) } else { ratio(i, self.pred as f64) },
            recall: ratio(i, self.gt as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SemanticScores {
    pub iou: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub type SemanticCounters = BTreeMap<ClassLabel, PixelCounts>;

/// Per-class pixel counters of predicted against ground-truth class maps.
/// A class missing from one side counts as an empty map there; classes
/// empty on both sides are left out.
pub fn semantic_metrics(
    pred_maps: &BTreeMap<ClassLabel, BinaryMask>,
    gt_maps: &BTreeMap<ClassLabel, BinaryMask>,
) -> Result<SemanticCounters, MaskError> {
    if let (Some(p), Some(g)) = (pred_maps.values().next(), gt_maps.values().next()) {
        p.check_same_dims(g)?;
    }
    let mut out = SemanticCounters::new();
    let labels: LabelSet = pred_maps.keys().chain(gt_maps.keys()).cloned().collect();
    for label in labels {
        let counts = match (pred_maps.get(&label), gt_maps.get(&label)) {
            (Some(p), Some(g)) => {
                let c = p.overlap_counts(g)?;
                PixelCounts {
                    intersection: c.intersection,
                    union: c.union,
                    gt: g.area(),
                    pred: p.area(),
                }
            }
            (Some(p), None) => PixelCounts {
                intersection: 0,
                union: p.area(),
                gt: 0,
                pred: p.area(),
            },
            (None, Some(g)) => PixelCounts {
                intersection: 0,
                union: g.area(),
                gt: g.area(),
                pred: 0,
            },
            (None, None) => unreachable!(),
        };
        if !counts.is_absent() {
            out.insert(label, counts);
        }
    }
    Ok(out)
}

/// Class maps formed by uniting the masks of every instance carrying each
/// label.
pub fn semantic_maps<'a, I>(width: u32, height: u32, segments: I) -> Result<BTreeMap<ClassLabel, BinaryMask>, MaskError>
where
    I: IntoIterator<Item = (&'a BinaryMask, &'a LabelSet)>,
{
    let mut grouped: BTreeMap<ClassLabel, Vec<&BinaryMask>> = BTreeMap::new();
    for (mask, labels) in segments {
        for label in labels {
            grouped.entry(label.clone()).or_default().push(mask);
        }
    }
    grouped
        .into_iter()
        .map(|(label, masks)| Ok((label, BinaryMask::union_all(width, height, masks)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
        BinaryMask::rect(10, 10, x0, y0, x1, y1).unwrap()
    }

    fn map(entries: &[(&str, BinaryMask)]) -> BTreeMap<ClassLabel, BinaryMask> {
        entries.iter().map(|(l, m)| (ClassLabel::new(*l), m.clone())).collect()
    }

    #[test]
    fn identity() {
        let m = map(&[("liquid", rect(0, 0, 5, 5)), ("foam", rect(5, 5, 9, 9))]);
        let c = semantic_metrics(&m, &m).unwrap();
        for counts in c.values() {
            let s = counts.scores();
            assert_eq!((s.iou, s.precision, s.recall), (Some(1.0), Some(1.0), Some(1.0)));
        }
    }

    #[test]
    fn empty_prediction() {
        let gt = map(&[("liquid", rect(0, 0, 5, 5))]);
        let pred = map(&[("liquid", BinaryMask::empty(10, 10).unwrap())]);
        let s = semantic_metrics(&pred, &gt).unwrap()["liquid"].scores();
        assert_eq!((s.iou, s.precision, s.recall), (Some(0.0), Some(0.0), Some(0.0)));
        let s = semantic_metrics(&BTreeMap::new(), &gt).unwrap()["liquid"].scores();
        assert_eq!((s.iou, s.precision, s.recall), (Some(0.0), Some(0.0), Some(0.0)));
    }

    #[test]
    fn pixel_count_example() {
        // gt 60 px, pred 70 px, overlap 30 px
        let gt = map(&[("liquid", rect(0, 0, 10, 6))]);
        let pred = map(&[("liquid", rect(0, 3, 10, 10))]);
        let c = semantic_metrics(&pred, &gt).unwrap()["liquid"];
        assert_eq!(c, PixelCounts { intersection: 30, union: 100, gt: 60, pred: 70 });
        let s = c.scores();
        assert_eq!(s.iou, Some(0.3));
        assert_eq!(s.precision, Some(30.0 / 70.0));
        assert_eq!(s.recall, Some(0.5));
    }

    #[test]
    fn absent_class_left_out() {
        let e = BinaryMask::empty(10, 10).unwrap();
        let m = map(&[("gel", e)]);
        assert!(semantic_metrics(&m, &m).unwrap().is_empty());
        assert_eq!(PixelCounts::default().scores(), SemanticScores::default());
    }

    #[test]
    fn false_positive_class_has_no_recall() {
        let pred = map(&[("gel", rect(0, 0, 2, 2))]);
        let s = semantic_metrics(&pred, &BTreeMap::new()).unwrap()["gel"].scores();
        assert_eq!((s.iou, s.precision, s.recall), (Some(0.0), Some(0.0), None));
    }

    #[test]
    fn maps_unite_instances() {
        let a = rect(0, 0, 2, 2);
        let b = rect(5, 5, 7, 7);
        let la = crate::taxonomy::labels(["liquid", "filled"]);
        let lb = crate::taxonomy::labels(["foam", "filled"]);
        let maps = semantic_maps(10, 10, [(&a, &la), (&b, &lb)]).unwrap();
        assert_eq!(maps["filled"].area(), 8);
        assert_eq!(maps["liquid"], a);
        assert_eq!(maps["foam"], b);
    }
}

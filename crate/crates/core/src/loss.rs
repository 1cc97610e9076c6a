//! Framework-free reference for the mask losses.
//!
//! Every mask is predicted as a pair of logit maps (belongs / does not
//! belong) normalised per pixel with a two-way softmax. Losses are mean
//! binary cross-entropy per pixel with probabilities clamped to
//! `[EPSILON, 1 - EPSILON]`. Instance slots are paired with ground truth
//! (padded with empty masks) by a Hungarian assignment on `1 - IOU` of the
//! binarised predictions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::mask::{BinaryMask, MaskError};
use crate::matching::{hungarian_assign_tiebreak, pad_instances, CostMatrix, MatchingError};
use crate::scalar::{Cost, Scalar};
use crate::taxonomy::ClassLabel;

/// Probability clamp used inside logarithms.
pub const EPSILON: f64 = 1e-7;

/// Number of instance slots predicted per vessel.
pub const DEFAULT_SLOTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("map is {got_width}x{got_height}, expected {width}x{height}")]
    Dimensions {
        width: u32,
        height: u32,
        got_width: u32,
        got_height: u32,
    },
    #[error("map has {got} values, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("non-finite value at pixel {0}")]
    NonFinite(usize),
    #[error("probability outside [0, 1] at pixel {0}")]
    OutOfRange(usize),
    #[error("class '{0}' is missing from the predictions or the ground truth")]
    MissingClass(String),
    #[error("no classes to average over")]
    NoClasses,
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Per-pixel probabilities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap<T> {
    width: u32,
    height: u32,
    values: Vec<T>,
}

impl<T: Scalar> ProbabilityMap<T> {
    pub fn new(width: u32, height: u32, values: Vec<T>) -> Result<Self, LossError> {
        check_len(width, height, values.len())?;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(LossError::NonFinite(i));
            }
            if *v < T::zero() || *v > T::one() {
                return Err(LossError::OutOfRange(i));
            }
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Pixels with probability at least one half.
    pub fn binarize(&self) -> BinaryMask {
        let half = T::lit(0.5);
        let bits: Vec<bool> = self.values.iter().map(|&p| p >= half).collect();
        BinaryMask::encode(&bits, self.width, self.height).expect("dimensions checked at construction")
    }
}

/// Logit maps for "belongs" and "does not belong", row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitPair<T> {
    width: u32,
    height: u32,
    yes: Vec<T>,
    no: Vec<T>,
}

impl<T: Scalar> LogitPair<T> {
    pub fn new(width: u32, height: u32, yes: Vec<T>, no: Vec<T>) -> Result<Self, LossError> {
        check_len(width, height, yes.len())?;
        check_len(width, height, no.len())?;
        if let Some(i) = yes.iter().chain(&no).position(|v| !v.is_finite()) {
            return Err(LossError::NonFinite(i % yes.len().max(1)));
        }
        Ok(Self { width, height, yes, no })
    }

    /// Pair whose softmax is `p` wherever `mask` is set and `1 - p` elsewhere,
    /// i.e. logit difference `±ln(p / (1 - p))`.
    pub fn confident(mask: &BinaryMask, margin: T) -> Self {
        let bits = mask.decode();
        let yes = bits.iter().map(|&b| if b { margin } else { -margin }).collect();
        let no = vec![T::zero(); bits.len()];
        Self {
            width: mask.width(),
            height: mask.height(),
            yes,
            no,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn yes(&self) -> &[T] {
        &self.yes
    }

    pub fn no(&self) -> &[T] {
        &self.no
    }

    /// Same maps with roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            yes: self.no.clone(),
            no: self.yes.clone(),
        }
    }
}

fn check_len(width: u32, height: u32, len: usize) -> Result<(), LossError> {
    let expected = width as usize * height as usize;
    if len != expected {
        return Err(LossError::Length { expected, got: len });
    }
    Ok(())
}

fn check_dims(width: u32, height: u32, mask: &BinaryMask) -> Result<(), LossError> {
    if mask.width() != width || mask.height() != height {
        return Err(LossError::Dimensions {
            width,
            height,
            got_width: mask.width(),
            got_height: mask.height(),
        });
    }
    Ok(())
}

/// `exp(yes) / (exp(yes) + exp(no))` without overflow.
fn softmax_yes<T: Scalar>(yes: T, no: T) -> T {
    let d = yes - no;
    if d >= T::zero() {
        T::one() / (T::one() + (-d).exp())
    } else {
        let e = d.exp();
        e / (T::one() + e)
    }
}

/// Per-pixel probability that the pixel belongs to the mask.
pub fn softmax_pair<T: Scalar>(pair: &LogitPair<T>) -> ProbabilityMap<T> {
    let values = pair
        .yes
        .iter()
        .zip(&pair.no)
        .map(|(&y, &n)| softmax_yes(y, n))
        .collect();
    ProbabilityMap {
        width: pair.width,
        height: pair.height,
        values,
    }
}

/// Mean clamped binary cross-entropy between probabilities and a mask.
pub fn pixel_cross_entropy<T: Scalar>(p: &ProbabilityMap<T>, gt: &BinaryMask) -> Result<T, LossError> {
    check_dims(p.width, p.height, gt)?;
    let eps = T::lit(EPSILON);
    let hi = T::one() - eps;
    let mut total = T::zero();
    let mut idx = 0usize;
    let mut value = false;
    for &run in gt.runs() {
        for &prob in &p.values[idx..idx + run as usize] {
            let q = prob.max(eps).min(hi);
            total = total - if value { q.ln() } else { (T::one() - q).ln() };
        }
        idx += run as usize;
        value = !value;
    }
    Ok(total / T::from_usize(p.values.len()).unwrap())
}

/// Mean over classes of the per-class cross-entropy. Both maps must hold
/// exactly the same classes.
pub fn semantic_loss<T: Scalar>(
    preds: &BTreeMap<ClassLabel, LogitPair<T>>,
    gts: &BTreeMap<ClassLabel, BinaryMask>,
) -> Result<T, LossError> {
    if let Some(k) = preds.keys().find(|k| !gts.contains_key(*k)) {
        return Err(LossError::MissingClass(k.to_string()));
    }
    if let Some(k) = gts.keys().find(|k| !preds.contains_key(*k)) {
        return Err(LossError::MissingClass(k.to_string()));
    }
    if preds.is_empty() {
        return Err(LossError::NoClasses);
    }
    let mut total = T::zero();
    for (label, pair) in preds {
        total = total + pixel_cross_entropy(&softmax_pair(pair), &gts[label])?;
    }
    Ok(total / T::from_usize(preds.len()).unwrap())
}

/// What an instance slot was matched to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotTarget {
    /// Index into the ground-truth instance list.
    Instance(usize),
    /// A padding mask.
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceLoss<T> {
    pub loss: T,
    /// One entry per slot.
    pub assignment: Vec<SlotTarget>,
}

/// Hungarian-matched instance loss over a fixed number of slots.
///
/// Ground truth is padded with empty masks to the slot count; the cost of
/// pairing a slot with a mask is `1 - IOU` of the slot's binarised
/// prediction, counting two empty masks as IOU 1. Assignments that tie on
/// that cost are separated by their cross-entropy, so the result does not
/// depend on slot or instance order. The loss is the mean cross-entropy of
/// each slot against its assigned mask.
pub fn instance_loss<T: Scalar + Cost>(
    slots: &[LogitPair<T>],
    gt_instances: &[BinaryMask],
) -> Result<InstanceLoss<T>, LossError> {
    let n = slots.len();
    if gt_instances.len() > n {
        return Err(MatchingError::Capacity {
            count: gt_instances.len(),
            slots: n,
        }
        .into());
    }
    if n == 0 {
        return Err(LossError::NoClasses);
    }
    let (width, height) = (slots[0].width, slots[0].height);
    for s in slots {
        if (s.width, s.height) != (width, height) {
            return Err(LossError::Dimensions {
                width,
                height,
                got_width: s.width,
                got_height: s.height,
            });
        }
    }
    let padded = pad_instances(gt_instances, n, width, height)?;
    let probs: Vec<ProbabilityMap<T>> = slots.iter().map(softmax_pair).collect();
    let binarized: Vec<BinaryMask> = probs.iter().map(ProbabilityMap::binarize).collect();

    let mut iou_cost = Vec::with_capacity(n * n);
    let mut ce_cost = Vec::with_capacity(n * n);
    for (pred, prob) in binarized.iter().zip(&probs) {
        for target in &padded {
            let iou = pred.iou(target)?.unwrap_or(1.0);
            iou_cost.push(T::lit(1.0 - iou));
            ce_cost.push(pixel_cross_entropy(prob, target)?);
        }
    }
    let assignment = hungarian_assign_tiebreak(&CostMatrix::new(n, n, iou_cost)?, &CostMatrix::new(n, n, ce_cost.clone())?)?;

    let mut total = T::zero();
    for (slot, &target) in assignment.row_to_col.iter().enumerate() {
        total = total + ce_cost[slot * n + target];
    }
    let targets = assignment
        .row_to_col
        .iter()
        .map(|&j| {
            if j < gt_instances.len() {
                SlotTarget::Instance(j)
            } else {
                SlotTarget::Empty
            }
        })
        .collect();
    Ok(InstanceLoss {
        loss: total / T::from_usize(n).unwrap(),
        assignment: targets,
    })
}

/// Gradient of `pixel_cross_entropy(softmax_pair(pair), gt)` with respect to
/// the yes and no logit maps: `(p - gt) / pixels` and its negation. Exact
/// wherever the probability lies inside the clamp range.
pub fn cross_entropy_gradient<T: Scalar>(pair: &LogitPair<T>, gt: &BinaryMask) -> Result<(Vec<T>, Vec<T>), LossError> {
    check_dims(pair.width, pair.height, gt)?;
    let p = softmax_pair(pair);
    let n = T::from_usize(p.values.len()).unwrap();
    let bits = gt.decode();
    let yes: Vec<T> = p
        .values
        .iter()
        .zip(&bits)
        .map(|(&prob, &b)| (prob - if b { T::one() } else { T::zero() }) / n)
        .collect();
    let no = yes.iter().map(|&g| -g).collect();
    Ok((yes, no))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(yes: Vec<f64>, no: Vec<f64>, w: u32, h: u32) -> LogitPair<f64> {
        LogitPair::new(w, h, yes, no).unwrap()
    }

    #[test]
    fn softmax_examples() {
        let p = softmax_pair(&pair(vec![0.3; 4], vec![0.3; 4], 2, 2));
        assert!(p.values().iter().all(|&v| v == 0.5));

        let p = softmax_pair(&pair(vec![3f64.ln()], vec![0.0], 1, 1));
        assert!((p.values()[0] - 0.75).abs() < 1e-15);

        let p = softmax_pair(&pair(vec![1000.0, -1000.0], vec![0.0, 0.0], 2, 1));
        assert_eq!(p.values(), &[1.0, 0.0]);
    }

    #[test]
    fn softmax_in_f32() {
        let pr = LogitPair::<f32>::new(1, 1, vec![500.0], vec![-500.0]).unwrap();
        assert_eq!(softmax_pair(&pr).values(), &[1.0f32]);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            LogitPair::new(1, 2, vec![0.0, f64::NAN], vec![0.0, 0.0]),
            Err(LossError::NonFinite(1))
        ));
        assert!(LogitPair::new(1, 1, vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(LogitPair::new(2, 2, vec![0.0], vec![0.0]).is_err());
        assert!(ProbabilityMap::new(1, 1, vec![1.5]).is_err());
    }

    #[test]
    fn cross_entropy_examples() {
        let gt = BinaryMask::encode(&[true, false, false, true], 2, 2).unwrap();
        let exact = ProbabilityMap::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let l = pixel_cross_entropy(&exact, &gt).unwrap();
        assert!((l - -(1.0 - EPSILON).ln()).abs() < 1e-18);
        assert!(l > 0.0 && l < 1.1e-7);

        let half = ProbabilityMap::new(2, 2, vec![0.5; 4]).unwrap();
        assert!((pixel_cross_entropy(&half, &gt).unwrap() - 2f64.ln()).abs() < 1e-15);

        let wrong = BinaryMask::empty(3, 3).unwrap();
        assert!(matches!(pixel_cross_entropy(&half, &wrong), Err(LossError::Dimensions { .. })));
    }

    #[test]
    fn semantic_loss_examples() {
        let gt = BinaryMask::rect(4, 4, 0, 0, 2, 4).unwrap();
        let preds: BTreeMap<ClassLabel, LogitPair<f64>> =
            [(ClassLabel::new("liquid"), LogitPair::confident(&gt, 40.0))].into();
        let gts: BTreeMap<ClassLabel, BinaryMask> = [(ClassLabel::new("liquid"), gt.clone())].into();
        assert!(semantic_loss(&preds, &gts).unwrap() <= 1e-6);

        let uniform: BTreeMap<ClassLabel, LogitPair<f64>> =
            [(ClassLabel::new("liquid"), pair(vec![0.0; 16], vec![0.0; 16], 4, 4))].into();
        assert!((semantic_loss(&uniform, &gts).unwrap() - 2f64.ln()).abs() < 1e-15);

        let mut two = uniform.clone();
        two.insert("foam".into(), LogitPair::confident(&gt, 40.0));
        let mut two_gts = gts.clone();
        two_gts.insert("foam".into(), gt.clone());
        let a = semantic_loss(&uniform, &gts).unwrap();
        let b = pixel_cross_entropy(&softmax_pair(&two["foam"]), &gt).unwrap();
        assert!((semantic_loss(&two, &two_gts).unwrap() - (a + b) / 2.0).abs() < 1e-15);

        assert!(matches!(semantic_loss(&two, &gts), Err(LossError::MissingClass(c)) if c == "foam"));
    }

    #[test]
    fn instance_loss_perfect_prediction() {
        let a = BinaryMask::rect(8, 8, 0, 0, 3, 3).unwrap();
        let b = BinaryMask::rect(8, 8, 4, 4, 8, 8).unwrap();
        let empty = BinaryMask::empty(8, 8).unwrap();
        let mut slots: Vec<LogitPair<f64>> = (0..8).map(|_| LogitPair::confident(&empty, 40.0)).collect();
        slots.insert(3, LogitPair::confident(&b, 40.0));
        slots.insert(6, LogitPair::confident(&a, 40.0));
        let out = instance_loss(&slots, &[a, b]).unwrap();
        assert!(out.loss <= 1e-6);
        assert_eq!(out.assignment[3], SlotTarget::Instance(1));
        assert_eq!(out.assignment[6], SlotTarget::Instance(0));
        assert_eq!(out.assignment.iter().filter(|t| **t == SlotTarget::Empty).count(), 8);
    }

    #[test]
    fn instance_loss_capacity() {
        let m = BinaryMask::rect(4, 4, 0, 0, 1, 1).unwrap();
        let slots = vec![LogitPair::confident(&m, 5.0); 2];
        assert!(matches!(
            instance_loss(&slots, &[m.clone(), m.clone(), m]),
            Err(LossError::Matching(MatchingError::Capacity { count: 3, slots: 2 }))
        ));
    }

    #[test]
    fn gradient_closed_form() {
        let gt = BinaryMask::encode(&[true, false], 2, 1).unwrap();
        let (gy, gn) = cross_entropy_gradient(&pair(vec![0.0, -40.0], vec![0.0, 0.0], 2, 1), &gt).unwrap();
        assert_eq!(gy[0], -0.25);
        assert_eq!(gn[0], 0.25);
        assert!(gy[1].abs() < 1e-17);
    }
}

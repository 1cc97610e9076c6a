//! Run-length encoded binary masks and the pixel-set algebra built on them.
//!
//! Runs are row-major and alternate zero-run / one-run, always starting with a
//! zero-run that may have length 0. Every constructor produces the canonical
//! form: no run after the first is empty, so two adjacent runs never encode
//! the same value.
//!
//! Set operations walk the runs directly; nothing is decoded to pixels.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("mask dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: u32,
        expected_height: u32,
        width: u32,
        height: u32,
    },
    #[error("pixel buffer has {actual} entries, expected {expected}")]
    LengthMismatch { expected: u64, actual: u64 },
    #[error("invalid runs: {0}")]
    InvalidRuns(String),
    #[error("degenerate input: inner mask is empty")]
    EmptyInner,
}

/// Binary pixel region of a fixed `width` x `height` image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    runs: Vec<u64>,
}

/// Half-open `[start, end)` range of set pixels in row-major index space.
pub type Interval = (u64, u64);

fn check_dims(width: u32, height: u32) -> Result<u64, MaskError> {
    if width == 0 || height == 0 {
        return Err(MaskError::ZeroDimension { width, height });
    }
    Ok(width as u64 * height as u64)
}

impl BinaryMask {
    /// Builds a mask from explicit runs, rejecting anything non-canonical.
    pub fn from_runs(width: u32, height: u32, runs: Vec<u64>) -> Result<Self, MaskError> {
        let total = check_dims(width, height)?;
        if runs.is_empty() {
            return Err(MaskError::InvalidRuns("run list is empty".into()));
        }
        if let Some(pos) = runs.iter().skip(1).position(|&r| r == 0) {
            return Err(MaskError::InvalidRuns(format!(
                "run {} has length 0 (only the leading zero-run may be empty)",
                pos + 1
            )));
        }
        let sum = runs
            .iter()
            .try_fold(0u64, |acc, &r| acc.checked_add(r))
            .ok_or_else(|| MaskError::InvalidRuns("run lengths overflow".into()))?;
        if sum != total {
            return Err(MaskError::InvalidRuns(format!(
                "runs sum to {sum}, expected {total}"
            )));
        }
        Ok(Self {
            width,
            height,
            runs,
        })
    }

    pub fn empty(width: u32, height: u32) -> Result<Self, MaskError> {
        let total = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            runs: vec![total],
        })
    }

    pub fn full(width: u32, height: u32) -> Result<Self, MaskError> {
        let total = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            runs: vec![0, total],
        })
    }

    /// Run-length encodes a row-major pixel sequence.
    pub fn encode(pixels: &[bool], width: u32, height: u32) -> Result<Self, MaskError> {
        let total = check_dims(width, height)?;
        if pixels.len() as u64 != total {
            return Err(MaskError::LengthMismatch {
                expected: total,
                actual: pixels.len() as u64,
            });
        }
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u64;
        for &px in pixels {
            if px != current {
                runs.push(len);
                current = px;
                len = 0;
            }
            len += 1;
        }
        runs.push(len);
        Ok(Self {
            width,
            height,
            runs,
        })
    }

    /// Expands the mask back to a row-major pixel sequence.
    pub fn decode(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.pixel_count() as usize);
        let mut value = false;
        for &run in &self.runs {
            out.extend(std::iter::repeat_n(value, run as usize));
            value = !value;
        }
        out
    }

    /// Builds a mask from sorted, non-overlapping set-pixel intervals.
    /// Touching intervals are merged.
    pub fn from_intervals<I>(width: u32, height: u32, intervals: I) -> Result<Self, MaskError>
    where
        I: IntoIterator<Item = Interval>,
    {
        let total = check_dims(width, height)?;
        let mut runs = Vec::new();
        let mut cursor = 0u64;
        for (start, end) in intervals {
            if start >= end {
                continue;
            }
            if start < cursor || end > total {
                return Err(MaskError::InvalidRuns(format!(
                    "interval [{start}, {end}) is out of order or out of bounds"
                )));
            }
            if start == cursor && !runs.is_empty() {
                // extend the previous one-run
                *runs.last_mut().unwrap() += end - start;
            } else {
                runs.push(start - cursor);
                runs.push(end - start);
            }
            cursor = end;
        }
        if runs.is_empty() {
            runs.push(total);
        } else if cursor < total {
            runs.push(total - cursor);
        }
        Ok(Self {
            width,
            height,
            runs,
        })
    }

    /// Mask built from a per-pixel predicate.
    pub fn from_fn<F>(width: u32, height: u32, mut f: F) -> Result<Self, MaskError>
    where
        F: FnMut(u32, u32) -> bool,
    {
        let total = check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(total as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::encode(&pixels, width, height)
    }

    /// Axis-aligned rectangle `[x0, x1) x [y0, y1)`, clipped to the image.
    pub fn rect(width: u32, height: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self, MaskError> {
        check_dims(width, height)?;
        let (x0, x1) = (x0.min(width), x1.min(width));
        let (y0, y1) = (y0.min(height), y1.min(height));
        let w = width as u64;
        let rows = (y0..y1).filter(|_| x0 < x1).map(|y| {
            let base = y as u64 * w;
            (base + x0 as u64, base + x1 as u64)
        });
        Self::from_intervals(width, height, rows)
    }

    /// Filled axis-aligned ellipse with centre `(cx, cy)` and semi-axes
    /// `(rx, ry)`, in pixel-centre coordinates, clipped to the image.
    pub fn ellipse(width: u32, height: u32, cx: f64, cy: f64, rx: f64, ry: f64) -> Result<Self, MaskError> {
        Self::ellipse_band(width, height, cx, cy, rx, ry, 0, height)
    }

    /// Rows `[y0, y1)` of a filled ellipse.
    #[allow(clippy::too_many_arguments)]
    pub fn ellipse_band(
        width: u32,
        height: u32,
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        y0: u32,
        y1: u32,
    ) -> Result<Self, MaskError> {
        check_dims(width, height)?;
        let w = width as u64;
        let mut intervals = Vec::new();
        if rx > 0.0 && ry > 0.0 {
            for y in y0.min(height)..y1.min(height) {
                let dy = (y as f64 + 0.5 - cy) / ry;
                let t = 1.0 - dy * dy;
                if t < 0.0 {
                    continue;
                }
                let half = rx * t.sqrt();
                // pixel x is inside iff |x + 0.5 - cx| <= half
                let lo = (cx - half - 0.5).ceil().max(0.0);
                let hi = (cx + half - 0.5).floor() + 1.0;
                let hi = hi.min(width as f64);
                if lo < hi {
                    let base = y as u64 * w;
                    intervals.push((base + lo as u64, base + hi as u64));
                }
            }
        }
        Self::from_intervals(width, height, intervals)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn runs(&self) -> &[u64] {
        &self.runs
    }

    pub fn into_runs(self) -> Vec<u64> {
        self.runs
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn same_dims(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_same_dims(&self, other: &Self) -> Result<(), MaskError> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(MaskError::DimensionMismatch {
                expected_width: self.width,
                expected_height: self.height,
                width: other.width,
                height: other.height,
            })
        }
    }

    /// Number of set pixels.
    pub fn area(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.len() == 1
    }

    /// Set-pixel intervals in ascending order.
    pub fn intervals(&self) -> Intervals<'_> {
        Intervals {
            runs: &self.runs,
            idx: 0,
            pos: 0,
        }
    }

    /// Row-major index of the first and one-past-last set pixel.
    pub fn span(&self) -> Option<Interval> {
        if self.is_empty() {
            return None;
        }
        let start = self.runs[0];
        let trailing = if self.runs.len() % 2 == 1 {
            *self.runs.last().unwrap()
        } else {
            0
        };
        Some((start, self.pixel_count() - trailing))
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        if x >= self.width || y >= self.height {
            return false;
        }
        let idx = y as u64 * self.width as u64 + x as u64;
        self.intervals()
            .take_while(|&(s, _)| s <= idx)
            .any(|(s, e)| s <= idx && idx < e)
    }

    /// `|self ∩ other|`.
    pub fn intersection_area(&self, other: &Self) -> Result<u64, MaskError> {
        self.check_same_dims(other)?;
        Ok(intersection_count(self, other))
    }

    /// `|self ∪ other|`.
    pub fn union_area(&self, other: &Self) -> Result<u64, MaskError> {
        let inter = self.intersection_area(other)?;
        Ok(self.area() + other.area() - inter)
    }

    /// Intersection over union; `None` when both masks are empty.
    pub fn iou(&self, other: &Self) -> Result<Option<f64>, MaskError> {
        let counts = self.overlap_counts(other)?;
        Ok(counts.iou())
    }

    /// Intersection and union pixel counts in a single pass.
    pub fn overlap_counts(&self, other: &Self) -> Result<OverlapCounts, MaskError> {
        self.check_same_dims(other)?;
        let intersection = intersection_count(self, other);
        Ok(OverlapCounts {
            intersection,
            union: self.area() + other.area() - intersection,
        })
    }

    /// `|inner ∩ outer| / |inner|`.
    pub fn overlap_fraction(inner: &Self, outer: &Self) -> Result<f64, MaskError> {
        inner.check_same_dims(outer)?;
        let area = inner.area();
        if area == 0 {
            return Err(MaskError::EmptyInner);
        }
        Ok(intersection_count(inner, outer) as f64 / area as f64)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, MaskError> {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self, MaskError> {
        self.combine(other, |a, b| a || b)
    }

    /// Pixels in `self` but not in `other`.
    pub fn difference(&self, other: &Self) -> Result<Self, MaskError> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        let mut runs = Vec::with_capacity(self.runs.len() + 1);
        if self.runs[0] == 0 {
            runs.extend_from_slice(&self.runs[1..]);
        } else {
            runs.push(0);
            runs.extend_from_slice(&self.runs);
        }
        Self {
            width: self.width,
            height: self.height,
            runs,
        }
    }

    /// Union of many masks of identical dimensions.
    pub fn union_all<'a, I>(width: u32, height: u32, masks: I) -> Result<Self, MaskError>
    where
        I: IntoIterator<Item = &'a BinaryMask>,
    {
        let mut acc = Self::empty(width, height)?;
        for m in masks {
            acc = acc.union(m)?;
        }
        Ok(acc)
    }

    /// Pixel-wise boolean combination of two masks, computed on run boundaries.
    fn combine<F>(&self, other: &Self, op: F) -> Result<Self, MaskError>
    where
        F: Fn(bool, bool) -> bool,
    {
        self.check_same_dims(other)?;
        let total = self.pixel_count();
        let mut runs = Vec::with_capacity(self.runs.len() + other.runs.len());
        let mut current = false;
        let mut len = 0u64;
        let mut a = RunCursor::new(&self.runs);
        let mut b = RunCursor::new(&other.runs);
        let mut pos = 0u64;
        while pos < total {
            let step = a.remaining.min(b.remaining);
            let value = op(a.value, b.value);
            if value != current {
                runs.push(len);
                current = value;
                len = 0;
            }
            len += step;
            pos += step;
            a.advance(step);
            b.advance(step);
        }
        runs.push(len);
        Ok(Self {
            width: self.width,
            height: self.height,
            runs,
        })
    }
}

/// Intersection and union pixel counts of a mask pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapCounts {
    pub intersection: u64,
    pub union: u64,
}

impl OverlapCounts {
    pub fn iou(&self) -> Option<f64> {
        if self.union == 0 {
            None
        } else {
            Some(self.intersection as f64 / self.union as f64)
        }
    }

    /// Strict `IOU > 1/2`, decided on integer counts.
    pub fn iou_above_half(&self) -> bool {
        2 * self.intersection > self.union
    }
}

pub struct Intervals<'a> {
    runs: &'a [u64],
    idx: usize,
    pos: u64,
}

impl Iterator for Intervals<'_> {
    type Item = Interval;

    fn next(&mut self) -> Option<Interval> {
        if self.idx + 1 >= self.runs.len() {
            return None;
        }
        let start = self.pos + self.runs[self.idx];
        let end = start + self.runs[self.idx + 1];
        self.pos = end;
        self.idx += 2;
        Some((start, end))
    }
}

struct RunCursor<'a> {
    runs: &'a [u64],
    idx: usize,
    remaining: u64,
    value: bool,
}

impl<'a> RunCursor<'a> {
    fn new(runs: &'a [u64]) -> Self {
        let mut cursor = Self {
            runs,
            idx: 0,
            remaining: runs[0],
            value: false,
        };
        cursor.skip_empty();
        cursor
    }

    fn skip_empty(&mut self) {
        while self.remaining == 0 && self.idx + 1 < self.runs.len() {
            self.idx += 1;
            self.remaining = self.runs[self.idx];
            self.value = !self.value;
        }
    }

    fn advance(&mut self, step: u64) {
        self.remaining -= step;
        self.skip_empty();
    }
}

fn intersection_count(a: &BinaryMask, b: &BinaryMask) -> u64 {
    match (a.span(), b.span()) {
        (Some((s1, e1)), Some((s2, e2))) if s1 < e2 && s2 < e1 => {}
        _ => return 0,
    }
    let mut total = 0u64;
    let mut ia = a.intervals();
    let mut ib = b.intervals();
    let mut x = ia.next();
    let mut y = ib.next();
    while let (Some((s1, e1)), Some((s2, e2))) = (x, y) {
        let lo = s1.max(s2);
        let hi = e1.min(e2);
        if lo < hi {
            total += hi - lo;
        }
        match e1.cmp(&e2) {
            Ordering::Less => x = ia.next(),
            Ordering::Greater => y = ib.next(),
            Ordering::Equal => {
                x = ia.next();
                y = ib.next();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1').collect()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(BinaryMask::encode(&[false; 16], 4, 4).unwrap().runs(), &[16]);
        assert_eq!(BinaryMask::encode(&[true; 16], 4, 4).unwrap().runs(), &[0, 16]);
        let m = BinaryMask::encode(&bits("1001"), 2, 2).unwrap();
        assert_eq!(m.runs(), &[0, 1, 2, 1]);
        assert_eq!(m.area(), 2);
    }

    #[test]
    fn encode_length_mismatch() {
        let err = BinaryMask::encode(&[true; 5], 2, 2).unwrap_err();
        assert_eq!(err, MaskError::LengthMismatch { expected: 4, actual: 5 });
    }

    #[test]
    fn decode_examples() {
        let zeros = BinaryMask::from_runs(4, 4, vec![16]).unwrap();
        assert_eq!(zeros.decode(), vec![false; 16]);
        let ones = BinaryMask::from_runs(4, 4, vec![0, 16]).unwrap();
        assert_eq!(ones.decode(), vec![true; 16]);
        assert_eq!(ones.area(), 16);
        assert_eq!(zeros.area(), 0);
    }

    #[test]
    fn rejects_non_canonical_runs() {
        assert!(BinaryMask::from_runs(2, 2, vec![0, 2, 0, 2]).is_err());
        assert!(BinaryMask::from_runs(2, 2, vec![1, 2]).is_err());
        assert!(BinaryMask::from_runs(2, 2, vec![]).is_err());
        assert!(BinaryMask::from_runs(0, 2, vec![0]).is_err());
        assert!(BinaryMask::from_runs(2, 2, vec![4, 0]).is_err());
    }

    #[test]
    fn iou_examples() {
        let a = BinaryMask::rect(10, 10, 0, 0, 10, 6).unwrap();
        let b = BinaryMask::rect(10, 10, 0, 3, 10, 10).unwrap();
        assert_eq!(a.area(), 60);
        assert_eq!(b.area(), 70);
        assert_eq!(a.iou(&b).unwrap(), Some(0.3));
        assert_eq!(a.iou(&a).unwrap(), Some(1.0));

        let c = BinaryMask::rect(10, 10, 0, 0, 2, 2).unwrap();
        let d = BinaryMask::rect(10, 10, 5, 5, 7, 7).unwrap();
        assert_eq!(c.iou(&d).unwrap(), Some(0.0));

        let e = BinaryMask::empty(10, 10).unwrap();
        assert_eq!(e.iou(&e).unwrap(), None);
    }

    #[test]
    fn iou_dimension_mismatch() {
        let a = BinaryMask::empty(3, 3).unwrap();
        let b = BinaryMask::empty(3, 4).unwrap();
        assert!(matches!(a.iou(&b), Err(MaskError::DimensionMismatch { .. })));
    }

    #[test]
    fn overlap_fraction_examples() {
        let outer = BinaryMask::rect(10, 10, 0, 0, 10, 10).unwrap();
        let inner = BinaryMask::rect(10, 10, 2, 2, 4, 4).unwrap();
        assert_eq!(BinaryMask::overlap_fraction(&inner, &outer).unwrap(), 1.0);

        let far = BinaryMask::rect(10, 10, 8, 8, 10, 10).unwrap();
        assert_eq!(BinaryMask::overlap_fraction(&inner, &far).unwrap(), 0.0);

        // 50 px inner, left half covered
        let inner = BinaryMask::rect(10, 10, 0, 0, 10, 5).unwrap();
        let half = BinaryMask::rect(10, 10, 0, 0, 5, 10).unwrap();
        assert_eq!(BinaryMask::overlap_fraction(&inner, &half).unwrap(), 0.5);

        let empty = BinaryMask::empty(10, 10).unwrap();
        assert_eq!(
            BinaryMask::overlap_fraction(&empty, &outer),
            Err(MaskError::EmptyInner)
        );
    }

    #[test]
    fn set_operations_match_pixels() {
        let a = BinaryMask::encode(&bits("0110 1100 0011 1111"), 4, 4).unwrap();
        let b = BinaryMask::encode(&bits("1100 0110 0001 0000"), 4, 4).unwrap();
        assert_eq!(a.intersection(&b).unwrap().decode(), bits("0100 0100 0001 0000"));
        assert_eq!(a.union(&b).unwrap().decode(), bits("1110 1110 0011 1111"));
        assert_eq!(a.difference(&b).unwrap().decode(), bits("0010 1000 0010 1111"));
        assert_eq!(a.complement().decode(), bits("1001 0011 1100 0000"));
        assert_eq!(a.intersection_area(&b).unwrap(), 3);
    }

    #[test]
    fn complement_is_canonical() {
        let full = BinaryMask::full(3, 3).unwrap();
        assert_eq!(full.complement().runs(), &[9]);
        assert_eq!(full.complement().complement(), full);
    }

    #[test]
    fn ellipse_is_symmetric() {
        let e = BinaryMask::ellipse(21, 21, 10.5, 10.5, 6.0, 4.0).unwrap();
        let px = e.decode();
        for y in 0..21usize {
            for x in 0..21usize {
                assert_eq!(px[y * 21 + x], px[y * 21 + (20 - x)]);
                assert_eq!(px[y * 21 + x], px[(20 - y) * 21 + x]);
            }
        }
        assert!(e.contains(10, 10));
        assert!(!e.contains(0, 0));
    }

    #[test]
    fn span_and_contains() {
        let m = BinaryMask::rect(5, 5, 1, 1, 3, 2).unwrap();
        assert_eq!(m.span(), Some((6, 8)));
        assert!(m.contains(2, 1));
        assert!(!m.contains(3, 1));
        assert_eq!(BinaryMask::empty(5, 5).unwrap().span(), None);
        assert_eq!(BinaryMask::full(5, 5).unwrap().span(), Some((0, 25)));
    }
}

use proptest::prelude::*;
use vesseleval::BinaryMask;

fn pixels() -> impl Strategy<Value = (u32, u32, Vec<bool>, Vec<bool>)> {
    (1u32..24, 1u32..24).prop_flat_map(|(w, h)| {
        let n = (w * h) as usize;
        (
            Just(w),
            Just(h),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #[test]
    fn encode_decode_round_trip((w, h, a, _) in pixels()) {
        let m = BinaryMask::encode(&a, w, h).unwrap();
        prop_assert_eq!(m.decode(), a.clone());
        prop_assert_eq!(m.area(), a.iter().filter(|&&b| b).count() as u64);
        let again = BinaryMask::from_runs(w, h, m.runs().to_vec()).unwrap();
        prop_assert_eq!(again, m);
    }

    #[test]
    fn set_algebra_matches_pixels((w, h, a, b) in pixels()) {
        let ma = BinaryMask::encode(&a, w, h).unwrap();
        let mb = BinaryMask::encode(&b, w, h).unwrap();
        let inter = a.iter().zip(&b).filter(|(x, y)| **x && **y).count() as u64;
        let union = a.iter().zip(&b).filter(|(x, y)| **x || **y).count() as u64;
        prop_assert_eq!(ma.intersection_area(&mb).unwrap(), inter);
        prop_assert_eq!(ma.union_area(&mb).unwrap(), union);
        prop_assert_eq!(ma.area() + mb.area(), inter + union);

        let and: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x && *y).collect();
        let or: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
        let diff: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x && !*y).collect();
        prop_assert_eq!(ma.intersection(&mb).unwrap().decode(), and);
        prop_assert_eq!(ma.union(&mb).unwrap().decode(), or);
        prop_assert_eq!(ma.difference(&mb).unwrap().decode(), diff);
        let not: Vec<bool> = a.iter().map(|x| !x).collect();
        prop_assert_eq!(ma.complement().decode(), not);
    }

    #[test]
    fn iou_is_symmetric_and_bounded((w, h, a, b) in pixels()) {
        let ma = BinaryMask::encode(&a, w, h).unwrap();
        let mb = BinaryMask::encode(&b, w, h).unwrap();
        let ab = ma.iou(&mb).unwrap();
        prop_assert_eq!(ab, mb.iou(&ma).unwrap());
        match ab {
            None => prop_assert!(ma.is_empty() && mb.is_empty()),
            Some(v) => prop_assert!((0.0..=1.0).contains(&v)),
        }
        if !ma.is_empty() {
            prop_assert_eq!(ma.iou(&ma).unwrap(), Some(1.0));
        }
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let a = BinaryMask::empty(4, 4).unwrap();
    let b = BinaryMask::empty(4, 5).unwrap();
    assert!(a.iou(&b).is_err());
    assert!(a.union(&b).is_err());
}

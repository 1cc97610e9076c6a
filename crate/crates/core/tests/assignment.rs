mod common;

use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vesseleval::matching::{hungarian_assign, pq_match, CostMatrix, MatchMode, Segment};
use vesseleval::{labels, BinaryMask};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[test]
fn integer_costs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let cost = CostMatrix::from_fn(n, n, |_, _| rng.gen_range(0i64..40));
        let best = permutations(n).iter().map(|p| cost.total(p)).min().unwrap();
        let a = hungarian_assign(&cost).unwrap();
        assert_eq!(a.total, best);
        assert_eq!(cost.total(&a.row_to_col), best);
    }
}

#[test]
fn rational_costs_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let cost = CostMatrix::from_fn(n, n, |_, _| Ratio::new(rng.gen_range(0i64..50), rng.gen_range(1i64..9)));
        let best = permutations(n).iter().map(|p| cost.total(p)).min().unwrap();
        assert_eq!(hungarian_assign(&cost).unwrap().total, best);
    }
}

#[test]
fn f32_costs_find_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let cost = CostMatrix::from_fn(n, n, |_, _| rng.gen_range(0u8..16) as f32 / 4.0);
        let best = permutations(n)
            .iter()
            .map(|p| cost.total(p))
            .fold(f32::INFINITY, f32::min);
        assert_eq!(hungarian_assign(&cost).unwrap().total, best);
    }
}

fn disjoint_segments(n: usize) -> Vec<BinaryMask> {
    (0..n as u32)
        .map(|i| BinaryMask::rect(64, 8, i * 8, 0, i * 8 + 6, 8).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn matching_counts_are_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gts: Vec<BinaryMask> = (0..rng.gen_range(0..5)).map(|_| common::random_mask(&mut rng, 6, 6)).collect();
        let preds: Vec<BinaryMask> = (0..rng.gen_range(0..5)).map(|_| common::random_mask(&mut rng, 6, 6)).collect();
        let l = labels(["liquid"]);
        let g: Vec<Segment> = gts.iter().map(|m| Segment::new(m, l.clone())).collect();
        let p: Vec<Segment> = preds.iter().map(|m| Segment::new(m, l.clone())).collect();
        let r = pq_match(&p, &g, MatchMode::ClassAgnostic).unwrap();
        prop_assert_eq!(r.matches.len() + r.fn_gt.len(), gts.len());
        prop_assert_eq!(r.matches.len() + r.fp_pred.len(), preds.len());
        for m in &r.matches {
            prop_assert!(m.iou > 0.5);
        }
    }

    #[test]
    fn matching_ignores_order_on_disjoint_sets(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(), keep in prop::collection::vec(any::<bool>(), 8)) {
        let masks = disjoint_segments(8);
        let l = labels(["liquid"]);
        let gts: Vec<Segment> = masks.iter().map(|m| Segment::new(m, l.clone())).collect();
        let preds: Vec<Segment> = perm
            .iter()
            .filter(|&&i| keep[i])
            .map(|&i| Segment::new(&masks[i], l.clone()))
            .collect();
        let r = pq_match(&preds, &gts, MatchMode::WithClass).unwrap();
        let matched: Vec<usize> = r.matches.iter().map(|m| m.gt).collect();
        let expected: Vec<usize> = (0..8).filter(|&i| keep[i]).collect();
        prop_assert_eq!(matched, expected);
        for m in &r.matches {
            prop_assert_eq!(perm.iter().filter(|&&i| keep[i]).nth(m.pred), Some(&m.gt));
        }
    }
}

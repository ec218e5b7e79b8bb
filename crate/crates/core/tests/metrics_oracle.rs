//! Error metrics checked against exhaustive enumeration.

use lloyd_core::model::{groupwise_rate, misclustering_rate, misclustering_rate_bijective};
use lloyd_core::LabelVector;
use proptest::prelude::*;

fn mistakes(truth: &[usize], estimate: &[usize], map: &[usize]) -> usize {
    truth.iter().zip(estimate).filter(|&(&g, &h)| map[h] != g).count()
}

/// Minimum mistakes over all k^k maps from estimated to true labels.
fn enumerate_all_maps(truth: &[usize], estimate: &[usize], k: usize) -> usize {
    let mut map = vec![0; k];
    let mut best = usize::MAX;
    loop {
        best = best.min(mistakes(truth, estimate, &map));
        let mut pos = 0;
        while pos < k {
            map[pos] += 1;
            if map[pos] < k {
                break;
            }
            map[pos] = 0;
            pos += 1;
        }
        if pos == k {
            return best;
        }
    }
}

/// Minimum mistakes over all k! permutations (Heap's algorithm).
fn enumerate_permutations(truth: &[usize], estimate: &[usize], k: usize) -> usize {
    fn heap(m: usize, perm: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if m <= 1 {
            visit(perm);
            return;
        }
        for i in 0..m {
            heap(m - 1, perm, visit);
            let j = if m % 2 == 0 { i } else { 0 };
            perm.swap(j, m - 1);
        }
    }
    let mut best = usize::MAX;
    let mut perm: Vec<usize> = (0..k).collect();
    heap(k, &mut perm, &mut |p| best = best.min(mistakes(truth, estimate, p)));
    best
}

fn label_pair() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (1usize..=6, 1usize..=40).prop_flat_map(|(k, n)| {
        (
            Just(k),
            proptest::collection::vec(0..k, n),
            proptest::collection::vec(0..k, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loss_matches_enumeration((k, truth, estimate) in label_pair()) {
        let n = truth.len() as f64;
        let t = LabelVector::new(truth.clone(), k).unwrap();
        let e = LabelVector::new(estimate.clone(), k).unwrap();
        let any_map = misclustering_rate(&t, &e).unwrap();
        prop_assert_eq!(any_map.rate, enumerate_all_maps(&truth, &estimate, k) as f64 / n);
        prop_assert_eq!(mistakes(&truth, &estimate, &any_map.map) as f64 / n, any_map.rate);
        let bijective = misclustering_rate_bijective(&t, &e).unwrap();
        prop_assert_eq!(bijective.rate, enumerate_permutations(&truth, &estimate, k) as f64 / n);
        prop_assert!(any_map.rate <= bijective.rate);
    }

    #[test]
    fn loss_is_label_permutation_invariant((k, truth, estimate) in label_pair(), shift in 0usize..6) {
        let t = LabelVector::new(truth, k).unwrap();
        let e = LabelVector::new(estimate.clone(), k).unwrap();
        let renamed = LabelVector::new(estimate.iter().map(|&h| (h + shift) % k).collect(), k).unwrap();
        prop_assert_eq!(misclustering_rate(&t, &e).unwrap().rate, misclustering_rate(&t, &renamed).unwrap().rate);
        prop_assert_eq!(
            misclustering_rate_bijective(&t, &e).unwrap().rate,
            misclustering_rate_bijective(&t, &renamed).unwrap().rate
        );
    }

    #[test]
    fn groupwise_rate_bounds_the_loss((k, truth, estimate) in label_pair()) {
        let t = LabelVector::new(truth, k).unwrap();
        let e = LabelVector::new(estimate, k).unwrap();
        let g = groupwise_rate(&t, &e).unwrap();
        prop_assert!((0.0..=1.0).contains(&g.rate));
        // every mistake is a true negative of some true cluster, so the
        // worst true-negative fraction is at least the average one
        prop_assert!(g.rate + 1e-12 >= misclustering_rate(&t, &e).unwrap().rate);
    }
}

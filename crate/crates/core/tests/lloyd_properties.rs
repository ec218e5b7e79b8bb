//! Lloyd iterations: monotone objective, naive-oracle updates, recovery.

use lloyd_core::lloyd::{
    center_update, fit_lloyd, fit_symmetric_two, flip_fraction, label_update, labels_to_signs,
    random_labels, Init, LloydConfig, SymmetricInit,
};
use lloyd_core::model::{kmeans_objective, misclustering_rate, Reference};
use lloyd_core::rng;
use lloyd_core::samplers::{sample_gmm, sample_symmetric_two, GmmSpec};
use lloyd_core::{CenterSet, DataMatrix, LabelVector};
use ndarray::Array1;
use proptest::prelude::*;

fn data_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, usize, u64)> {
    (2usize..40, 1usize..5, 1usize..6, any::<u64>()).prop_flat_map(|(n, d, k, seed)| {
        (
            proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, d), n),
            Just(k.min(n)),
            Just(seed),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_never_increases((rows, k, seed) in data_strategy()) {
        let y = DataMatrix::from_rows(&rows).unwrap();
        let init = random_labels(y.n(), k, &mut rng::stream(seed, "prop-init", 0));
        let config = LloydConfig::default().with_max_iter(25).full_budget();
        match fit_lloyd(&y, k, &Init::Labels(init), &config, None) {
            Ok(fit) => prop_assert!(fit.trace.objective_is_non_increasing(1e-9), "{:?}", fit.trace.objectives()),
            // a random labeling may leave a cluster empty before any center exists
            Err(e) => prop_assert!(matches!(e, lloyd_core::ClusterError::InvalidInit(_)), "{e}"),
        }
    }

    #[test]
    fn label_update_matches_naive_scan((rows, k, seed) in data_strategy()) {
        let y = DataMatrix::from_rows(&rows).unwrap();
        let mut r = rng::stream(seed, "prop-centers", 0);
        let centers: Vec<Vec<f64>> = (0..k).map(|_| {
            // reuse data points so exact ties occur
            let mut c = rows[rand::Rng::random_range(&mut r, 0..rows.len())].clone();
            if rand::Rng::random::<bool>(&mut r) { c[0] += 1.0; }
            c
        }).collect();
        let c = CenterSet::from_rows(&centers).unwrap();
        let got = label_update(&y, &c).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let dist = |h: usize| -> f64 { row.iter().zip(&centers[h]).map(|(a, b)| (a - b) * (a - b)).sum() };
            let mut best = 0;
            for h in 1..k {
                if dist(h) < dist(best) { best = h; }
            }
            prop_assert_eq!(got.get(i), best);
        }
    }

    #[test]
    fn center_update_matches_group_means((rows, k, seed) in data_strategy()) {
        let y = DataMatrix::from_rows(&rows).unwrap();
        let z = random_labels(y.n(), k, &mut rng::stream(seed, "prop-z", 0));
        let prev = CenterSet::from_rows(&vec![vec![7.5; y.d()]; k]).unwrap();
        let c = center_update(&y, &z, &prev).unwrap();
        for h in 0..k {
            let members: Vec<&Vec<f64>> = rows.iter().zip(z.as_slice()).filter(|(_, &l)| l == h).map(|(r, _)| r).collect();
            for j in 0..y.d() {
                let want = if members.is_empty() {
                    7.5
                } else {
                    members.iter().map(|r| r[j]).sum::<f64>() / members.len() as f64
                };
                prop_assert!((c.center(h)[j] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }
}

#[test]
fn well_separated_mixture_is_recovered_from_moderate_corruption() {
    let spec = GmmSpec::orthonormal(4, 20, 50, 0.1).unwrap();
    let (y, z) = sample_gmm(&spec, 3);
    let init = lloyd_core::lloyd::corrupt_cyclic(&z, 0.3, 4).unwrap();
    let reference = Reference::with_centers(z.clone(), spec.centers.clone());
    let fit = fit_lloyd(&y, 4, &Init::Labels(init), &LloydConfig::default(), Some(&reference)).unwrap();
    assert!(fit.converged);
    assert_eq!(misclustering_rate(&z, &fit.labels).unwrap().rate, 0.0);
    assert!(fit.trace.objective_is_non_increasing(1e-9));
    let objective = kmeans_objective(&y, &fit.centers).unwrap();
    assert_eq!(fit.trace.last().unwrap().metrics.objective, Some(objective));
}

#[test]
fn symmetric_center_is_signed_average() {
    let theta = Array1::from(vec![1.5, -0.5, 0.0]);
    let (y, truth) = sample_symmetric_two(&theta, 0.8, 60, 11).unwrap();
    let z = LabelVector::new(truth.iter().map(|&s| usize::from(s < 0)).collect(), 2).unwrap();
    let init = flip_fraction(&z, 0.2, 5).unwrap();
    let signs = labels_to_signs(&init);
    let config = LloydConfig::default().with_max_iter(1);
    let fit = fit_symmetric_two(&y, &SymmetricInit::Signs(signs.clone()), &config, None).unwrap();
    // one iteration: theta_1 = mean of z_i y_i under the initial signs,
    // then the labels are re-signed against it
    let mut theta0 = Array1::zeros(3);
    for (i, &s) in signs.iter().enumerate() {
        theta0 = theta0 + &y.row(i) * f64::from(s);
    }
    theta0 /= 60.0;
    for (i, &s) in fit.signs.iter().enumerate() {
        let proj = y.row(i).dot(&theta0);
        assert_eq!(s, if proj >= 0.0 { 1 } else { -1 });
    }
}

use proptest::prelude::*;

use colur::confidence::{
    avg_soft_labels, joint_confidence, mix_soft_labels, mixup, partition, smooth_label, Prediction,
};
use colur::data::{inject, make_blobs, split, NoiseSpec};
use colur::eval::{accuracy, confusion, Confusion, MetricsReport, ReportMetadata};
use colur::nn::{ascend, checkpoint, descend, forward, init_params, GradBundle, OptimState, SgdConfig};
use colur::Tensor;

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn simplex_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..8).prop_flat_map(|k| (simplex(k), simplex(k)))
}

fn on_simplex(p: &[f64]) -> bool {
    p.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)) && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

fn net_and_batch() -> impl Strategy<Value = (Vec<usize>, u64, Vec<f64>, f64)> {
    (prop::collection::vec(1usize..8, 2..5), any::<u64>(), 1usize..6, 0.1f64..100.0).prop_flat_map(
        |(sizes, seed, rows, scale)| {
            let d = sizes[0];
            (Just(sizes), Just(seed), prop::collection::vec(-1.0f64..1.0, rows * d), Just(scale))
        },
    )
}

fn predictions(n: usize, k: usize) -> impl Strategy<Value = Vec<Prediction>> {
    prop::collection::vec(simplex(k), n).prop_map(|v| v.into_iter().map(Prediction::from_probs).collect())
}

proptest! {
    #[test]
    fn forward_rows_are_distributions((sizes, seed, x, scale) in net_and_batch()) {
        let mut sizes = sizes;
        if *sizes.last().unwrap() < 2 {
            *sizes.last_mut().unwrap() = 2;
        }
        let params = init_params(&sizes, seed).unwrap();
        let rows = x.len() / sizes[0];
        let batch = Tensor::from_vec(&[rows, sizes[0]], x.iter().map(|v| v * scale).collect()).unwrap();
        let p = forward(&params, &batch).unwrap();
        for r in p.row_iter() {
            prop_assert!(r.iter().all(|&v| v >= 0.0));
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn ascent_then_descent_restores_parameters(seed in any::<u64>(), lr in 1e-4f64..1.0, g in -5.0f64..5.0) {
        let mut params = init_params(&[3, 4, 2], seed).unwrap();
        let before = params.clone();
        let mut grads: GradBundle = params.zeros_like();
        for (i, layer) in grads.layers.iter_mut().enumerate() {
            for (j, v) in layer.weight.data_mut().iter_mut().enumerate() {
                *v = g * ((i + j) as f64).sin();
            }
        }
        let cfg = SgdConfig { lr, momentum: 0.0, weight_decay: 0.0 };
        let mut opt = OptimState::new(&params, cfg).unwrap();
        ascend(&mut params, &grads, &opt).unwrap();
        descend(&mut params, &grads, &mut opt).unwrap();
        for (a, b) in params.layers().iter().zip(before.layers()) {
            for (x, y) in a.weight.data().iter().zip(b.weight.data()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            prop_assert_eq!(a.bias.data(), b.bias.data());
        }
    }

    #[test]
    fn checkpoints_roundtrip_bit_exactly(sizes in prop::collection::vec(1usize..6, 2..5), seed in any::<u64>()) {
        let params = init_params(&sizes, seed).unwrap();
        let back = checkpoint::decode(&checkpoint::encode(&params)).unwrap();
        prop_assert_eq!(back, params);
    }

    #[test]
    fn noise_is_exact_and_contained(
        k in 2usize..7,
        per_class in 1usize..40,
        eta in 0.0f64..=1.0,
        seed in any::<u64>(),
        asym in any::<bool>(),
    ) {
        let du = make_blobs(k, per_class, 2, 1.0, seed).unwrap();
        // Pairs of neighbouring classes; an odd last class joins the final pair.
        let mut groups: Vec<Vec<usize>> = (0..k / 2).map(|g| vec![2 * g, 2 * g + 1]).collect();
        if k % 2 == 1 {
            groups.last_mut().unwrap().push(k - 1);
        }
        let group_of = |c: usize| groups.iter().position(|g| g.contains(&c)).unwrap();
        let spec = if asym { NoiseSpec::asymmetric(eta, groups.clone()) } else { NoiseSpec::symmetric(eta) };
        let nd = inject(&du, &spec, seed).unwrap();
        let n = du.len();
        let expected = (eta * n as f64 + 1e-9).floor() as usize;
        prop_assert_eq!(nd.noise_flags.iter().filter(|&&f| f).count(), expected);
        for i in 0..n {
            let (obs, truth) = (nd.observed().labels()[i], nd.true_labels[i]);
            prop_assert_eq!(truth, du.labels()[i]);
            prop_assert_eq!(nd.noise_flags[i], obs != truth);
            if asym && nd.noise_flags[i] {
                prop_assert_eq!(group_of(obs), group_of(truth));
            }
        }
    }

    #[test]
    fn split_is_stratified_disjoint_and_exhaustive(
        k in 2usize..6,
        per_class in 2usize..50,
        num in 1usize..10,
        seed in any::<u64>(),
    ) {
        let ratio = num as f64 / 10.0;
        let d = make_blobs(k, per_class, 2, 1.0, seed).unwrap();
        let take = per_class * num / 10;
        let res = split(&d, ratio, seed);
        if take == 0 || take == per_class {
            prop_assert!(res.is_err());
            return Ok(());
        }
        let (a, b) = res.unwrap();
        prop_assert_eq!(a.class_counts(), vec![take; k]);
        prop_assert_eq!(b.class_counts(), vec![per_class - take; k]);
        let mut rows: Vec<Vec<u64>> = a
            .features()
            .row_iter()
            .chain(b.features().row_iter())
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut orig: Vec<Vec<u64>> = d.features().row_iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        rows.sort();
        orig.sort();
        prop_assert_eq!(rows, orig);
    }

    #[test]
    fn partition_is_exhaustive_and_disjoint(
        (t, u) in (1usize..30, 2usize..6).prop_flat_map(|(n, k)| (predictions(n, k), predictions(n, k))),
        tau in 0.0f64..=1.0,
    ) {
        let sets = partition(&t, &u, tau).unwrap();
        let mut seen = vec![0; t.len()];
        for idx in [&sets.high_disagree, &sets.low_disagree, &sets.high_agree, &sets.low_agree] {
            for &i in idx {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(sets.disagree.len() + sets.agree.len(), t.len());
        for &i in sets.high_disagree.iter().chain(&sets.high_agree) {
            prop_assert!(sets.joint_conf[i] >= tau);
        }
        for &i in sets.low_disagree.iter().chain(&sets.low_agree) {
            prop_assert!(sets.joint_conf[i] < tau);
        }
        for &i in &sets.agree {
            prop_assert_eq!(t[i].label, u[i].label);
        }
    }

    #[test]
    fn joint_confidence_is_symmetric_monotone_and_bounded(a in 0.0f64..=1.0, b in 0.0f64..=1.0, d in 0.0f64..=1.0) {
        let j = joint_confidence(a, b);
        prop_assert_eq!(j, joint_confidence(b, a));
        prop_assert!(a.min(b) - 1e-15 <= j && j <= a.max(b) + 1e-15);
        let bigger = (a + d).min(1.0);
        prop_assert!(joint_confidence(bigger, b) >= j);
    }

    #[test]
    fn mixing_preserves_the_simplex((p, q) in simplex_pair(), w in 0.0f64..=1.0) {
        prop_assert!(on_simplex(&mix_soft_labels(&p, &q, w).unwrap()));
        prop_assert!(on_simplex(&avg_soft_labels(&p, &q).unwrap()));
        let x = vec![0.5; 3];
        let (xm, pm) = mixup(&x, &p, &x, &q, w).unwrap();
        prop_assert!(on_simplex(&pm));
        prop_assert_eq!(xm.len(), 3);
    }

    #[test]
    fn smoothing_keeps_the_simplex_and_the_argmax(k in 2usize..12, y in 0usize..12, frac in 0.0f64..1.0) {
        let y = y % k;
        let limit = (k - 1) as f64 / k as f64;
        let gamma = frac * limit;
        let s = smooth_label(y, gamma, k).unwrap();
        prop_assert!(on_simplex(&s));
        prop_assert_eq!(Prediction::from_probs(s).label, y);
    }

    #[test]
    fn confusion_rows_count_reference_classes(seed in any::<u64>(), k in 2usize..5, per_class in 1usize..20) {
        let d = make_blobs(k, per_class, 2, 1.0, seed).unwrap();
        let params = init_params(&[2, 5, k], seed).unwrap();
        let c = confusion(&params, d.features(), d.labels(), k).unwrap();
        prop_assert_eq!(c.row_sums(), d.class_counts().iter().map(|&v| v as u64).collect::<Vec<_>>());
        prop_assert_eq!(c.trace() as f64 / c.total() as f64, accuracy(&params, &d).unwrap());
    }

    #[test]
    fn reports_roundtrip(
        acc in 0.0f64..=1.0,
        err in prop::option::of(0.0f64..=1.0),
        cells in prop::collection::vec(0u64..1000, 9),
        seed in any::<u64>(),
        name in "[a-z][a-z0-9_]{0,8}",
    ) {
        let r = MetricsReport {
            test_accuracy: acc,
            noisy_subset_error: err,
            confusion: Confusion(cells.chunks(3).map(|c| c.to_vec()).collect()),
            metadata: ReportMetadata {
                config_hash: "ab12".into(),
                seed,
                dataset: name,
                timestamp: "2024-01-01T00:00:00Z".into(),
            },
        };
        prop_assert_eq!(&MetricsReport::from_json(&r.to_json()).unwrap(), &r);
        prop_assert_eq!(&MetricsReport::from_csv(&r.to_csv()).unwrap(), &r);
    }
}

//! Distributional checks that need many seeds or draws.

use colur::bench;
use colur::confidence::sample_beta;
use colur::data::{inject, make_blobs, noise_stats, NoiseSpec};
use colur::eval::accuracy;
use colur::lur::{learn_initial, TrainSpec};
use colur::rng;

// chi-square 0.999 quantile, 8 degrees of freedom
const CHI2_DF8_999: f64 = 26.12;

#[test]
fn symmetric_targets_are_uniform_over_other_classes() {
    let k = 4;
    // counts[true][observed], pooled over seeds
    let mut counts = vec![vec![0usize; k]; k];
    for seed in 0..50 {
        let du = make_blobs(k, 60, 2, 1.0, seed).unwrap();
        let nd = inject(&du, &NoiseSpec::symmetric(0.5), seed).unwrap();
        assert_eq!(nd.noisy_count(), 120);
        for i in nd.noisy_indices() {
            counts[nd.true_labels[i]][nd.observed().labels()[i]] += 1;
        }
    }
    let mut chi2 = 0.0;
    for (t, row) in counts.iter().enumerate() {
        assert_eq!(row[t], 0);
        let n: usize = row.iter().sum();
        let expected = n as f64 / (k - 1) as f64;
        for (o, &c) in row.iter().enumerate() {
            if o != t {
                chi2 += (c as f64 - expected).powi(2) / expected;
            }
        }
    }
    assert!(chi2 < CHI2_DF8_999, "chi2 = {chi2}");
}

#[test]
fn corrupted_samples_are_spread_over_true_classes() {
    // Which samples get corrupted is a uniform draw, so every true class
    // loses about half its members.
    let k = 4;
    let mut lost = vec![0usize; k];
    for seed in 0..50 {
        let du = make_blobs(k, 60, 2, 1.0, seed).unwrap();
        let nd = inject(&du, &NoiseSpec::symmetric(0.5), seed).unwrap();
        for i in nd.noisy_indices() {
            lost[nd.true_labels[i]] += 1;
        }
    }
    let expected = 50.0 * 120.0 / k as f64;
    let chi2: f64 = lost.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 3 degrees of freedom, 0.999 quantile
    assert!(chi2 < 16.27, "chi2 = {chi2} from {lost:?}");
}

fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn beta_draws_are_symmetric_about_one_half() {
    let mut s = rng::stream(11, &[rng::tag("beta")]);
    let mut draws: Vec<f64> = (0..100_000).map(|_| sample_beta(0.75, &mut s).unwrap()).collect();
    assert!(draws.iter().all(|v| (0.0..=1.0).contains(v)));
    draws.sort_by(f64::total_cmp);
    let mirrored: Vec<f64> = draws.iter().rev().map(|v| 1.0 - v).collect();
    let d = ks_distance(&draws, &mirrored);
    assert!(d < 0.02, "KS distance {d}");
    let m = bench::mean(&draws);
    assert!((m - 0.5).abs() < 0.005, "mean {m}");
}

#[test]
fn asymmetric_noise_spreads_less_than_symmetric_for_pairs() {
    // Within a pair every flip lands on the partner class, so per-class
    // noisy counts stay closer to balanced than with K-1 targets.
    let groups = vec![vec![0, 1], vec![2, 3]];
    let (mut asym, mut sym) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let du = make_blobs(4, 60, 2, 1.0, seed).unwrap();
        let a = inject(&du, &NoiseSpec::asymmetric(0.5, groups.clone()), seed).unwrap();
        let s = inject(&du, &NoiseSpec::symmetric(0.5), seed).unwrap();
        asym.push(noise_stats(&a).noisy_std);
        sym.push(noise_stats(&s).noisy_std);
    }
    let (a, s) = (bench::mean(&asym), bench::mean(&sym));
    assert!(a < s, "asymmetric {a} vs symmetric {s}");
}

#[test]
fn blobs_are_linearly_separable() {
    let d = make_blobs(4, 250, 2, 1.0, 5).unwrap();
    let spec = TrainSpec {
        epochs: 30,
        ..TrainSpec::default()
    };
    let probe = learn_initial(&d, &[2, 4], &spec, 5).unwrap();
    let acc = accuracy(&probe, &d).unwrap();
    assert!(acc >= 0.99, "linear probe accuracy {acc}");
}

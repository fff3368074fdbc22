mod common;

use icll_core::evaluation::auc;
use icll_core::learners::{
    fit_balanced_forest, fit_forest, fit_logistic, fit_tree, Classifier, ForestConfig, LogisticConfig, TreeConfig,
};
use icll_core::seed;
use ndarray::{array, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use common::random_points;

fn accuracy(pred: &[u8], y: &[u8]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

#[test]
fn xor_needs_two_levels() {
    let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
    let y = [0, 1, 1, 0];
    let shallow = fit_tree(x.view(), &y, &TreeConfig { max_depth: Some(1), ..TreeConfig::default() }).unwrap();
    assert!(accuracy(&shallow.predict(x.view(), 0.5), &y) <= 0.75);
    let deep = fit_tree(x.view(), &y, &TreeConfig { max_depth: Some(2), ..TreeConfig::default() }).unwrap();
    assert_eq!(deep.predict(x.view(), 0.5), y);
}

/// Two overlapping Gaussian-ish clouds with label noise.
fn noisy(rng: &mut seed::Rng, n: usize) -> (Array2<f64>, Vec<u8>) {
    let x = random_points(rng, n, 4, 1.0);
    let y = x
        .rows()
        .into_iter()
        .map(|r| {
            let signal = r[0] + 0.5 * r[1] - 0.3 * r[2];
            u8::from(signal + rng.random_range(-0.6..0.6) > 0.2)
        })
        .collect();
    (x, y)
}

#[test]
fn forest_beats_single_tree_on_held_out_data() {
    let mut rng = seed::rng(11);
    let (mut tree_total, mut forest_total) = (0.0, 0.0);
    for s in 0..10 {
        let (xtr, ytr) = noisy(&mut rng, 200);
        let (xte, yte) = noisy(&mut rng, 300);
        let tree = fit_tree(xtr.view(), &ytr, &TreeConfig { seed: s, ..TreeConfig::default() }).unwrap();
        let forest = fit_forest(xtr.view(), &ytr, &ForestConfig { n_trees: 50, seed: s, ..ForestConfig::default() }).unwrap();
        tree_total += auc(&tree.score(xte.view()), &yte).unwrap();
        forest_total += auc(&forest.score(xte.view()), &yte).unwrap();
    }
    assert!(forest_total > tree_total, "forest {forest_total} vs tree {tree_total}");
}

#[test]
fn forest_separates_blobs() {
    let mut rng = seed::rng(12);
    let mut x = random_points(&mut rng, 60, 2, 0.5);
    let y: Vec<u8> = (0..60).map(|i| u8::from(i < 15)).collect();
    for i in 0..15 {
        x[[i, 0]] += 5.0;
    }
    let forest = fit_forest(x.view(), &y, &ForestConfig { n_trees: 20, ..ForestConfig::default() }).unwrap();
    assert_eq!(auc(&forest.score(x.view()), &y).unwrap(), 1.0);
}

#[test]
fn balanced_forest_lifts_minority_scores() {
    let mut rng = seed::rng(13);
    let n = 420;
    let x = random_points(&mut rng, n, 3, 1.0);
    let mut y = vec![0u8; n];
    for i in (0..n).step_by(21) {
        y[i] = 1;
    }
    let cfg = ForestConfig { n_trees: 50, seed: 4, ..ForestConfig::default() };
    let plain = fit_forest(x.view(), &y, &cfg).unwrap();
    let balanced = fit_balanced_forest(x.view(), &y, &cfg).unwrap();
    let xte = random_points(&mut rng, 200, 3, 1.0);
    let mean = |s: Vec<f64>| s.iter().sum::<f64>() / s.len() as f64;
    let minority: Vec<usize> = (0..n).filter(|&i| y[i] == 1).collect();
    let xm = x.select(Axis(0), &minority);
    assert!(mean(balanced.score(xm.view())) > mean(plain.score(xm.view())));
    assert!(mean(balanced.score(xte.view())) > mean(plain.score(xte.view())));
    assert_eq!(balanced, fit_balanced_forest(x.view(), &y, &cfg).unwrap());
}

#[test]
fn logistic_ignores_row_order() {
    let mut rng = seed::rng(14);
    let (x, y) = noisy(&mut rng, 80);
    let cfg = LogisticConfig::default();
    let model = fit_logistic(x.view(), &y, &cfg).unwrap();
    let mut order: Vec<usize> = (0..80).collect();
    order.shuffle(&mut rng);
    let xp = x.select(Axis(0), &order);
    let yp: Vec<u8> = order.iter().map(|&i| y[i]).collect();
    let permuted = fit_logistic(xp.view(), &yp, &cfg).unwrap();
    for (a, b) in model.score(x.view()).iter().zip(permuted.score(x.view())) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn logistic_label_flip_mirrors_scores() {
    let mut rng = seed::rng(15);
    let (x, y) = noisy(&mut rng, 80);
    let flipped: Vec<u8> = y.iter().map(|v| 1 - v).collect();
    let cfg = LogisticConfig::default();
    let a = fit_logistic(x.view(), &y, &cfg).unwrap().score(x.view());
    let b = fit_logistic(x.view(), &flipped, &cfg).unwrap().score(x.view());
    for (u, v) in a.iter().zip(&b) {
        assert!((u + v - 1.0).abs() < 1e-9);
    }
}

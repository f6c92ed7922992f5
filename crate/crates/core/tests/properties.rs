//! Randomized invariants over the loss catalogue, the data generators,
//! and one fixed demonstration that the two-moons task is not linearly
//! separable.

use lossbench::data::{gen_gaussian_blobs, gen_two_moons, one_hot, split};
use lossbench::harness::{train, NetworkDesc, TrainConfig};
use lossbench::losses::catalogue;
use lossbench::network::argmax;
use lossbench::{Activation, LossFamily, LossSpec, OptimizerState, OutputHead, Variant};
use proptest::prelude::*;

fn catalogue_index() -> impl Strategy<Value = LossSpec> {
    (0..catalogue().len()).prop_map(|i| catalogue()[i])
}

proptest! {
    #[test]
    fn losses_are_nonnegative(spec in catalogue_index(), p in 1e-6..=(1.0 - 1e-6), y in 0usize..2) {
        let v = spec.eval(y as f64, p).unwrap();
        prop_assert!(v >= -1e-12, "{} l({y}, {p}) = {v}", spec.name());
        prop_assert!(v.is_finite());
    }

    #[test]
    fn gradients_match_finite_differences(
        spec in catalogue_index(),
        p in 1e-2..=0.99f64,
        y in 0usize..2,
    ) {
        let h = 1e-6;
        let y = y as f64;
        let analytic = spec.grad(y, p).unwrap();
        let fd = (spec.eval(y, p + h).unwrap() - spec.eval(y, p - h).unwrap()) / (2.0 * h);
        let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
        prop_assert!(rel < 1e-5, "{} y={y} y_hat={p}: {analytic} vs {fd}", spec.name());
    }

    #[test]
    fn full_losses_are_symmetric(family_idx in 0usize..5, p in 0.01..=0.99f64) {
        let family = [
            LossFamily::CrossEntropy,
            LossFamily::M,
            LossFamily::L,
            LossFamily::Tan,
            LossFamily::Sec,
        ][family_idx];
        let spec = LossSpec::new(family, Variant::Full).unwrap();
        let a = spec.eval(1.0, p).unwrap();
        let b = spec.eval(0.0, 1.0 - p).unwrap();
        let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
        prop_assert!(rel < 1e-12, "{}: l(1,{p})={a} vs l(0,{})={b}", spec.name(), 1.0 - p);
    }

    #[test]
    fn single_sided_losses_ignore_negative_examples(
        spec in catalogue_index().prop_filter("single-sided only", |s| s.variant == Variant::SingleSided),
        p in 1e-6..=(1.0 - 1e-6),
    ) {
        prop_assert_eq!(spec.eval(0.0, p).unwrap(), 0.0);
        prop_assert_eq!(spec.grad(0.0, p).unwrap(), 0.0);
    }

    #[test]
    fn one_hot_round_trips_through_argmax(labels in proptest::collection::vec(0usize..5, 1..40)) {
        let encoded = one_hot(&labels, 5);
        for (row, &label) in encoded.iter().zip(&labels) {
            prop_assert_eq!(argmax(row), label);
            prop_assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn split_is_stratified(n in 40usize..200, frac in 0.1..0.5f64, seed in 0u64..1000) {
        let ds = gen_two_moons(n, 0.05, seed).unwrap();
        let (tr, te) = split(&ds, frac, seed).unwrap();
        prop_assert_eq!(tr.len() + te.len(), ds.len());
        for class in 0..ds.class_count {
            let total = ds.labels.iter().filter(|&&l| l == class).count();
            let test = te.labels.iter().filter(|&&l| l == class).count();
            let want = (total as f64 * frac).round() as usize;
            prop_assert_eq!(test, want, "class {}", class);
        }
    }

    #[test]
    fn generators_are_deterministic(seed in 0u64..1000) {
        let a = gen_two_moons(50, 0.1, seed).unwrap();
        let b = gen_two_moons(50, 0.1, seed).unwrap();
        prop_assert_eq!(a, b);
        let centers = vec![vec![0.0, 0.0], vec![3.0, 3.0]];
        let c = gen_gaussian_blobs(50, &centers, 1.0, seed).unwrap();
        let d = gen_gaussian_blobs(50, &centers, 1.0, seed).unwrap();
        prop_assert_eq!(c, d);
    }
}

/// A [2, 2] softmax network is exactly a linear classifier, so its
/// ceiling on two moons sits well below what the MLP reaches.
#[test]
fn two_moons_defeats_a_linear_classifier() {
    let ds = gen_two_moons(400, 0.1, 3).unwrap();
    let (train_ds, test_ds) = split(&ds, 0.2, 3).unwrap();
    let base = TrainConfig {
        loss: LossSpec::new(LossFamily::CrossEntropy, Variant::Full).unwrap(),
        optimizer: OptimizerState::adam(1e-2).unwrap(),
        batch_size: 32,
        epochs: 60,
        steps_per_epoch: None,
        seed: 3,
        network: NetworkDesc {
            layer_sizes: vec![2, 2],
            hidden_activation: Activation::Tanh,
            output_head: OutputHead::Softmax,
        },
    };
    let linear = train(&base, &train_ds, &test_ds).unwrap();
    let mut deep = base.clone();
    deep.network.layer_sizes = vec![2, 16, 2];
    let mlp = train(&deep, &train_ds, &test_ds).unwrap();
    assert!(
        linear.final_train_acc < 0.95,
        "linear classifier should cap out: {}",
        linear.final_train_acc
    );
    assert!(
        mlp.final_train_acc > 0.95,
        "mlp should separate the moons: {}",
        mlp.final_train_acc
    );
}

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use seasonal_threshold::insect::InsectParams;
use seasonal_threshold::linalg::Matrix;

/// Fixed seed so failures reproduce across runs.
pub fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

/// Metzler with strictly positive off-diagonal entries, hence irreducible.
pub fn metzler(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |mut v| {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v[i * n + j] = v[i * n + j].abs().max(0.05);
                }
            }
        }
        Matrix::new(n, v).unwrap()
    })
}

pub fn metzler_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (2usize..=5).prop_flat_map(|n| (metzler(n), metzler(n)))
}

pub fn positive(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(0.01f64..10.0, n * n).prop_map(move |v| Matrix::new(n, v).unwrap())
}

pub fn insect_params() -> impl Strategy<Value = InsectParams> {
    (0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0)
        .prop_map(|(b, h, dj, cj, da)| InsectParams::new(b, h, dj, cj, da).unwrap())
}

pub fn running_pair() -> (InsectParams, InsectParams) {
    (InsectParams::new(1.0, 0.5, 1.0, 1.0, 1.0).unwrap(), InsectParams::new(2.0, 1.0, 0.5, 1.0, 0.5).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
